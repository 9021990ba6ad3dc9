#include "soliton/geometry.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <limits>

#include "soliton/errors.hpp"
#include "soliton/verifier.hpp"

namespace soliton {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double gauss_integral(const DenseSegment& seg, double a, double b) {
  if (b == a) return 0.0;
  return boost::math::quadrature::gauss<double, 10>::integrate([&](double s) { return seg.w(s); },
                                                                a, b);
}

std::size_t segment_index(const Trajectory& t, double s) {
  return static_cast<std::size_t>(&t.segment_at(s) - t.segments.data());
}

// Power-series helpers for the odd w-series a[k] s^k.
double series_derivative(const std::vector<double>& a, double s) {
  double d = 0.0;
  for (std::size_t k = a.size(); k-- > 1;) d = d * s + static_cast<double>(k) * a[k];
  return d;
}

double series_integral(const std::vector<double>& a, double s) {
  double f = 0.0;
  for (std::size_t k = a.size(); k-- > 0;) f = f * s + a[k] / static_cast<double>(k + 1);
  return f * s;
}

}  // namespace

// ---------------------------------------------------------------- graphs

GraphFunction::GraphFunction(const Trajectory& traj, double s_ref, double f_ref) : traj_(traj) {
  if (traj_.segments.empty()) throw DomainError("graph: trajectory has no dense output");
  cumulative_.resize(traj_.segments.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < traj_.segments.size(); ++i) {
    cumulative_[i] = acc;
    const auto& seg = traj_.segments[i];
    acc += gauss_integral(seg, seg.s_lo, seg.s_hi);
  }
  offset_ = f_ref - integral_to(s_ref);
}

GraphFunction::GraphFunction(std::vector<double> w_series, double s_join, const Trajectory& traj)
    : GraphFunction(traj, traj.dense_lo(), 0.0) {
  series_ = std::move(w_series);
  s_join_ = s_join;
  offset_ = series_integral(series_, traj_.dense_lo());
}

double GraphFunction::integral_to(double s) const {
  const std::size_t i = segment_index(traj_, s);
  const auto& seg = traj_.segments[i];
  return cumulative_[i] + gauss_integral(seg, seg.s_lo, s);
}

double GraphFunction::s_lo() const { return series_.empty() ? traj_.dense_lo() : 0.0; }
double GraphFunction::s_hi() const { return traj_.dense_hi(); }

double GraphFunction::f(double s) const {
  if (!series_.empty() && s >= 0.0 && s < traj_.dense_lo()) return series_integral(series_, s);
  return offset_ + integral_to(s);
}

double GraphFunction::df(double s) const {
  if (!series_.empty() && s >= 0.0 && s < traj_.dense_lo()) return eval_series(series_, s);
  return traj_.w_at(s);
}

double GraphFunction::d2f(double s) const {
  if (!series_.empty() && s >= 0.0 && s < traj_.dense_lo()) return series_derivative(series_, s);
  return traj_.segment_at(s).slope(s);
}

ProfileCurve build_graph(const Trajectory& traj, double f0) {
  ProfileCurve out;
  out.kind = Parametrization::GraphOverS;
  out.params = traj.params;
  out.x_ref = traj.start.s;
  out.f0 = f0;
  out.truncated = traj.left.kind == TerminationKind::BlowUp ||
                  traj.right.kind == TerminationKind::BlowUp;
  const GraphFunction g(traj, traj.start.s, f0);
  auto push = [&](const DenseSegment& seg, double s) {
    if (!out.samples.empty() && !(s > out.samples.back().x)) return;
    const double gap = traj.params.has_barriers() ? seg.barrier_gap(s) : kNaN;
    out.samples.push_back({s, g.f(s), seg.w(s), seg.slope(s), gap});
  };
  for (const auto& seg : traj.segments) {
    push(seg, seg.s_lo);
    push(seg, 0.5 * (seg.s_lo + seg.s_hi));
  }
  if (!traj.segments.empty()) push(traj.segments.back(), traj.segments.back().s_hi);
  return out;
}

// ----------------------------------------------------------------- wings

std::string_view to_string(WingEnd e) {
  switch (e) {
    case WingEnd::LightconeContact: return "lightcone_contact";
    case WingEnd::SlopeEscape: return "slope_escape";
    case WingEnd::AlphaLimit: return "alpha_limit";
    case WingEnd::SpanLimit: return "span_limit";
    case WingEnd::StepCollapse: return "step_collapse";
  }
  return "?";
}

const ode::DenseStep<2>& WingFunction::step_at(double y) const {
  if (steps_.empty() || y < y_lo() || y > y_hi())
    throw DomainError("wing: y outside the integrated span");
  auto it = std::upper_bound(steps_.begin(), steps_.end(), y,
                             [](double v, const ode::DenseStep<2>& st) { return v < st.x0; });
  if (it == steps_.begin()) return steps_.front();
  return *std::prev(it);
}

double WingFunction::alpha(double y) const { return step_at(y).value(y)[0]; }

double WingFunction::alpha_prime(double y) const {
  const double eta = step_at(y).value(y)[1];
  return strip_chart_ ? std::tanh(eta) : eta;
}

double WingFunction::alpha_second(double y) const {
  const auto& st = step_at(y);
  const double d = st.derivative(y)[1];
  if (!strip_chart_) return d;
  const double p = std::tanh(st.value(y)[1]);
  return (1.0 - p * p) * d;
}

class WingBuilder {
 public:
  WingBuilder(const FlowParams& p, const WingConfig& cfg) : p_(p), cfg_(cfg) {
    strip_ = p.has_barriers();
  }

  struct Run {
    std::vector<ode::DenseStep<2>> steps;  // in integration order
    double y_end = 0.0;
    WingEnd end = WingEnd::SpanLimit;
  };

  Run run(double s0, double y0, int dir) const {
    const double ep = p_.eps_prime;
    const bool strip = strip_;
    const FlowParams p = p_;
    auto f = [p, ep, strip](double, const ode::Vec<2>& y) -> ode::Vec<2> {
      if (strip) {
        const double q = std::tanh(y[1]);
        return {q, ep * (p.h(y[0]) - q)};
      }
      return {y[1], rhs_wing(p, y[0], y[1])};
    };
    auto valid = [](const ode::Vec<2>& y) { return y[0] > 0.0; };
    const double y_target = y0 + dir * cfg_.y_span;
    Run out;
    out.y_end = y_target;
    // Finer steps next to the apex, where branch graphs divide by alpha'^3.
    const double zone = std::min(cfg_.apex_zone, cfg_.y_span);
    const std::array<std::pair<double, double>, 2> phases{
        std::pair{y0 + dir * zone, std::min(cfg_.apex_step, cfg_.max_step)},
        std::pair{y_target, cfg_.max_step}};
    double y_now = y0;
    ode::Vec<2> state{s0, 0.0};
    std::size_t guard = 0;
    for (const auto& [phase_end, max_step] : phases) {
      if (y_now == phase_end) continue;
      ode::StepControl ctl{.rel_tol = cfg_.rel_tol, .abs_tol = cfg_.abs_tol, .max_step = max_step,
                           .min_step = 1e-14};
      auto stepper = ode::make_dopri5<2>(f, valid, ctl);
      stepper.reset(y_now, state, phase_end);
      while (stepper.x() != phase_end) {
        if (++guard > 2'000'000 || stepper.step(phase_end) != ode::StepStatus::Accepted) {
          out.end = WingEnd::StepCollapse;
          out.y_end = stepper.x();
          return out;
        }
        const auto& st = stepper.last_dense();
        out.steps.push_back(st);
        const double a = stepper.y()[0];
        const double slope = strip ? std::tanh(stepper.y()[1]) : stepper.y()[1];
        auto cut = [&](double level, WingEnd kind) {
          auto g = [&](double yy) { return st.value(yy)[0] - level; };
          double lo = st.x0, hi = st.x1();
          if (lo > hi) std::swap(lo, hi);
          boost::math::tools::eps_tolerance<double> tol(52);
          std::uintmax_t iters = 60;
          const auto r = boost::math::tools::toms748_solve(g, lo, hi, tol, iters);
          out.y_end = 0.5 * (r.first + r.second);
          out.end = kind;
        };
        if (a <= cfg_.alpha_stop) {
          cut(cfg_.alpha_stop, WingEnd::LightconeContact);
          return out;
        }
        if (a >= cfg_.alpha_max) {
          cut(cfg_.alpha_max, WingEnd::AlphaLimit);
          return out;
        }
        if (std::abs(slope) >= cfg_.slope_escape) {
          out.end = WingEnd::SlopeEscape;
          out.y_end = stepper.x();
          return out;
        }
      }
      y_now = stepper.x();
      state = stepper.y();
    }
    return out;
  }

  WingFunction assemble(const Run& back, const Run& fwd) const {
    WingFunction wf;
    wf.strip_chart_ = strip_;
    // Re-express each step with positive h so lookups are uniform.
    auto flip = [](ode::DenseStep<2> st) {
      if (st.h > 0) return st;
      // value(x) with th = (x - x0)/h; rewrite around x1 with -h.
      ode::DenseStep<2> r;
      r.x0 = st.x1();
      r.h = -st.h;
      // th' = 1 - th: p(th) = c0 + th(c1 + (1-th)(c2 + th(c3 + (1-th) c4)))
      //                    = (c0 + c1) + th'(-c1 + (1-th')(c2 + ... swapped))
      for (std::size_t i = 0; i < 2; ++i) {
        const double c0 = st.rc[0][i], c1 = st.rc[1][i], c2 = st.rc[2][i], c3 = st.rc[3][i],
                     c4 = st.rc[4][i];
        r.rc[0][i] = c0 + c1;
        r.rc[1][i] = -c1;
        r.rc[2][i] = c2 + c3;
        r.rc[3][i] = -c3;
        r.rc[4][i] = c4;
      }
      return r;
    };
    for (auto it = back.steps.rbegin(); it != back.steps.rend(); ++it) wf.steps_.push_back(flip(*it));
    for (const auto& st : fwd.steps) wf.steps_.push_back(flip(st));
    return wf;
  }

 private:
  FlowParams p_;
  WingConfig cfg_;
  bool strip_ = false;
};

namespace {

ProfileCurve invert_arc(const WingResult& w, const FlowParams& p, int side) {
  ProfileCurve br;
  br.kind = Parametrization::GraphOverS;
  br.params = p;
  br.f0 = w.y0;
  br.x_ref = w.curve.samples.empty() ? 0.0 : w.alpha.alpha(w.y0);
  br.apex = std::array<double, 2>{br.x_ref, w.y0};
  std::vector<ProfileSample> pts;
  int sign = 0;
  auto take = [&](const ProfileSample& smp) {
    if (smp.dv == 0.0) return false;
    const int sg = smp.dv > 0 ? 1 : -1;
    if (sign == 0) sign = sg;
    if (sg != sign) return false;  // end of the monotone sub-arc
    pts.push_back({smp.v, smp.x, 1.0 / smp.dv, -smp.d2v / (smp.dv * smp.dv * smp.dv)});
    return true;
  };
  const auto& s = w.curve.samples;
  const auto apex = std::find_if(s.begin(), s.end(), [&](const ProfileSample& q) { return q.x == w.y0; });
  if (side > 0) {
    for (auto it = apex + 1; it != s.end(); ++it)
      if (!take(*it)) break;
  } else {
    for (auto it = std::make_reverse_iterator(apex); it != s.rend(); ++it)
      if (!take(*it)) break;
  }
  std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) { return a.x < b.x; });
  for (const auto& q : pts)
    if (br.samples.empty() || q.x > br.samples.back().x) br.samples.push_back(q);
  return br;
}

}  // namespace

WingResult build_wing(const FlowParams& params, double s0, double y0, const WingConfig& cfg) {
  if (!(s0 > 0.0)) throw DomainError("wing: s0 must be positive");
  if (!(cfg.alpha_stop > 0.0 && cfg.alpha_stop < s0 && cfg.alpha_max > s0))
    throw ParameterError("wing: need 0 < alpha_stop < s0 < alpha_max");
  WingBuilder b(params, cfg);
  const auto back = b.run(s0, y0, -1);
  const auto fwd = b.run(s0, y0, +1);
  WingResult out;
  out.y0 = y0;
  out.alpha = b.assemble(back, fwd);
  out.y_lo = back.y_end;
  out.y_hi = fwd.y_end;
  out.end_lo = back.end;
  out.end_hi = fwd.end;

  auto& c = out.curve;
  c.kind = Parametrization::WingOverY;
  c.params = params;
  c.x_ref = y0;
  c.f0 = s0;
  c.lightcone_lo = back.end == WingEnd::LightconeContact;
  c.lightcone_hi = fwd.end == WingEnd::LightconeContact;
  auto push = [&](double y) {
    if (y < out.y_lo || y > out.y_hi) return;
    if (!c.samples.empty() && !(y > c.samples.back().x)) return;
    const double ap = y == y0 ? 0.0 : out.alpha.alpha_prime(y);
    c.samples.push_back({y, out.alpha.alpha(y), ap, out.alpha.alpha_second(y)});
  };
  std::vector<double> ys;
  for (const auto& st : back.steps) ys.insert(ys.end(), {st.x0, st.x0 + 0.5 * st.h});
  for (const auto& st : fwd.steps) ys.insert(ys.end(), {st.x0, st.x0 + 0.5 * st.h});
  ys.push_back(out.y_lo);
  ys.push_back(out.y_hi);
  std::sort(ys.begin(), ys.end());
  for (double y : ys) push(y);

  out.f_plus = invert_arc(out, params, -1);
  out.f_minus = invert_arc(out, params, +1);
  return out;
}

SpindleResult build_spindle(const FlowParams& params, double s0, const WingConfig& cfg) {
  if (params.eps_prime != -1 || params.eps_tilde != 1)
    throw ParameterError("spindle needs the rotational timelike form (eps' = -1, eps~ = +1)");
  SpindleResult out;
  out.wing = build_wing(params, s0, 0.0, cfg);
  const auto& w = out.wing;
  out.closed = w.end_lo == WingEnd::LightconeContact && w.end_hi == WingEnd::LightconeContact;
  out.slope_lo = w.alpha.alpha_prime(w.y_lo);
  out.slope_hi = w.alpha.alpha_prime(w.y_hi);
  out.y_axis_lo = w.y_lo - w.alpha.alpha(w.y_lo) / out.slope_lo;
  out.y_axis_hi = w.y_hi - w.alpha.alpha(w.y_hi) / out.slope_hi;
  return out;
}

TangencyReport tangency_check(const FlowParams& params, double s1, double s2, double radius,
                              int samples_per_side, const WingConfig& cfg) {
  if (!(0.0 < s1 && s1 < s2)) throw ParameterError("tangency: need 0 < s1 < s2");
  if (!(radius > 0.0) || samples_per_side < 1) throw ParameterError("tangency: bad sampling");
  const auto w1 = build_wing(params, s1, 0.0, cfg);
  const auto w2 = build_wing(params, s2, 0.0, cfg);
  if (w1.y_lo > -radius || w1.y_hi < radius || w2.y_lo > -radius || w2.y_hi < radius)
    throw DomainError("tangency: wings do not cover the sampled neighbourhood");
  TangencyReport r;
  r.beta_second = w1.alpha.alpha_second(0.0);
  r.alpha2_second = w2.alpha.alpha_second(0.0);
  r.max_gap = -std::numeric_limits<double>::infinity();
  const double shift = w2.alpha.alpha(0.0) - w1.alpha.alpha(0.0);
  for (int side : {-1, 1})
    for (int k = 1; k <= samples_per_side; ++k) {
      const double y = side * radius * k / samples_per_side;
      const double gap = w1.alpha.alpha(y) + shift - w2.alpha.alpha(y);
      r.max_gap = std::max(r.max_gap, gap);
      ++r.samples;
    }
  r.strictly_below = r.max_gap < 0.0;
  return r;
}

// ---------------------------------------------------------------- hybrid

void QuadrantMask::validate() const {
  const int count = static_cast<int>(std::count(on.begin(), on.end(), true));
  if (count < 2) throw ConfigError("hybrid mask must select at least two quadrants");
  if (count == 2) {
    for (int i = 0; i < 4; ++i)
      if (on[i] && on[(i + 1) % 4]) return;
    throw ConfigError("hybrid mask quadrants must be cyclically adjacent");
  }
}

QuadrantMask QuadrantMask::parse(const std::string& text) {
  QuadrantMask m;
  m.on = {false, false, false, false};
  for (char ch : text) {
    if (ch < '1' || ch > '4') throw ConfigError("hybrid mask: quadrants are 1..4, got '" + text + "'");
    m.on[ch - '1'] = true;
  }
  m.validate();
  return m;
}

std::string QuadrantMask::to_string() const {
  std::string s;
  for (int i = 0; i < 4; ++i)
    if (on[i]) s.push_back(static_cast<char>('1' + i));
  return s;
}

HybridField::HybridField(const HybridConfig& cfg) : cfg_(cfg) {
  cfg_.mask.validate();
  if (cfg_.order < 2) throw ParameterError("hybrid series order must be >= 2");
  if (!(cfg_.fiber_coeff > 0.0)) throw ParameterError("fiber coefficient must be positive");
  const FlowParams p1(cfg_.n, +1, +1, cfg_.fiber_coeff);
  const FlowParams p2(cfg_.n, +1, -1, cfg_.fiber_coeff);
  int w_order = cfg_.order - 1;
  if (w_order % 2 == 0) --w_order;
  std::vector<double> a1 = bowl_series_coeffs(p1, w_order + 2);
  std::vector<double> a2 = bowl_series_coeffs(p2, w_order + 2);
  const double next = std::max(std::abs(a1[w_order + 2]), std::abs(a2[w_order + 2]));
  s_join_ = 0.5;
  if (next > 0.0) s_join_ = std::min(0.5, std::pow(1e-17 / next, 1.0 / (w_order + 2)));
  a1.resize(w_order + 1);
  a2.resize(w_order + 1);
  auto taylor = [&](const std::vector<double>& a) {
    std::vector<double> t(cfg_.order + 1, 0.0);
    for (std::size_t k = 1; k < a.size() && k + 1 <= static_cast<std::size_t>(cfg_.order); ++k)
      t[k + 1] = a[k] / static_cast<double>(k + 1);
    return t;
  };
  f1_taylor_ = taylor(a1);
  f2_taylor_ = taylor(a2);
  IntegratorConfig ic = cfg_.integrator;
  ic.s_max = std::max(cfg_.s_max, 2.0 * s_join_);
  auto make = [&](const FlowParams& p, std::vector<double> a) {
    const PhaseState start{s_join_, eval_series(a, s_join_)};
    auto r = integrate(p, start, Direction::TowardInfinity, ic);
    if (r.trajectory.right.kind != TerminationKind::ReachedSMax)
      throw DomainError("hybrid: profile did not reach s_max");
    return GraphFunction(std::move(a), s_join_, r.trajectory);
  };
  f1_ = make(p1, a1);
  f2_ = make(p2, a2);
}

HybridField HybridField::mismatched() const {
  HybridField m = *this;
  m.f2_sign_ = -f2_sign_;
  return m;
}

bool HybridField::covers(double x, double y) const {
  const auto& on = cfg_.mask.on;
  const double ax = std::abs(x), ay = std::abs(y);
  if (ax > ay) return on[x > 0 ? 0 : 2];
  if (ay > ax) return on[y > 0 ? 1 : 3];
  if (ax == 0.0) return on[0] && on[1] && on[2] && on[3];
  // Cone ray between two quadrants.
  if (x > 0 && y > 0) return on[0] && on[1];
  if (x < 0 && y > 0) return on[1] && on[2];
  if (x < 0 && y < 0) return on[2] && on[3];
  return on[3] && on[0];
}

double HybridField::u(double x, double y) const {
  if (!covers(x, y)) return kNaN;
  const double S = (x - y) * (x + y);
  if (S > 0.0) return f1_.f(std::sqrt(S));
  if (S < 0.0) return f2_sign_ * f2_.f(std::sqrt(-S));
  return 0.0;
}

double HybridField::u_tilde(const std::vector<double>& x, double y) const {
  double r2 = 0.0;
  for (double v : x) r2 += v * v;
  return u(std::sqrt(r2), y);
}

double boost_invariance_defect(const HybridField& field, const std::vector<std::vector<double>>& xs,
                               const std::vector<double>& ys, const std::vector<double>& thetas) {
  if (xs.size() != ys.size()) throw ParameterError("boost check: point arrays differ in size");
  double worst = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double base = field.u_tilde(xs[i], ys[i]);
    if (!std::isfinite(base)) continue;
    for (double th : thetas) {
      std::vector<double> x = xs[i];
      const double ch = std::cosh(th), sh = std::sinh(th);
      x[0] = xs[i][0] * ch + ys[i] * sh;
      const double y = xs[i][0] * sh + ys[i] * ch;
      const double moved = field.u_tilde(x, y);
      worst = std::max(worst, std::isfinite(moved) ? std::abs(moved - base)
                                                   : std::numeric_limits<double>::infinity());
    }
  }
  return worst;
}

GridField sample_hybrid(const HybridField& field, const GridSpec& grid, int cone_tube_cells) {
  const GridAxis ax = GridAxis::span(grid.lo - 2 * grid.h, grid.hi + 2 * grid.h, grid.h);
  GridField g = GridField::sample({ax, ax}, {+1, -1}, +1,
                                  [&](std::span<const double> p) { return field.u(p[0], p[1]); });
  const double tube = cone_tube_cells * grid.h;
  g.mask_where([&](std::span<const double> p) {
    const double d = std::min(std::abs(p[0] - p[1]), std::abs(p[0] + p[1])) / std::sqrt(2.0);
    return d < tube * (1.0 - 1e-12);
  });
  return g;
}

HybridBuild build_hybrid(const HybridConfig& cfg, const GridSpec& grid) {
  HybridConfig c = cfg;
  c.s_max = std::max(c.s_max, 1.01 * std::max(std::abs(grid.lo), std::abs(grid.hi)));
  HybridField f(c);
  GridField g = sample_hybrid(f, grid);
  return {std::move(f), std::move(g)};
}

// ------------------------------------------------- boost timelike family

ProfileCurve timelike_family_from_strip(const FlowParams& params, SolutionTag which,
                                        const IntegratorConfig& cfg) {
  if (params.eps_tilde != -1 || params.eps_prime != 1)
    throw ParameterError("timelike family needs eps~ = -1, eps' = +1");
  if (which != SolutionTag::Bowl && which != SolutionTag::BelowBowl &&
      which != SolutionTag::AboveBowl)
    throw ParameterError("timelike family supports Bowl, BelowBowl and AboveBowl only");
  const FlowParams q(params.n, -1, +1, params.fiber_coeff);
  // f'' comes from the dense derivative, which needs more than the default tolerance.
  IntegratorConfig tight = cfg;
  tight.rel_tol = std::min(cfg.rel_tol, 1e-12);
  tight.abs_tol = std::min(cfg.abs_tol, 1e-14);
  const BowlSolution bowl = compute_bowl(q, tight);
  ProfileCurve out;
  if (which == SolutionTag::Bowl) {
    const GraphFunction g(bowl.series, bowl.s_join, bowl.trajectory);
    out.kind = Parametrization::GraphOverS;
    out.params = params;
    out.x_ref = 0.0;
    out.f0 = 0.0;
    auto push = [&](double s) {
      if (!out.samples.empty() && !(s > out.samples.back().x)) return;
      const double gap = s < bowl.trajectory.dense_lo() ? 1.0 - std::abs(g.df(s))
                                                         : bowl.trajectory.gap_at(s);
      out.samples.push_back({s, -g.f(s), -g.df(s), -g.d2f(s), gap});
    };
    for (int k = 0; k < 4; ++k) push(bowl.s_join * k / 4.0);
    for (const auto& seg : bowl.trajectory.segments) {
      push(seg.s_lo);
      push(0.5 * (seg.s_lo + seg.s_hi));
    }
    push(bowl.trajectory.dense_hi());
    return out;
  }
  const double wb = bowl.w(1.0);
  const double w0 = which == SolutionTag::BelowBowl ? 0.5 * (wb - 1.0) : 0.5 * (wb + 1.0);
  const Trajectory t = integrate_both(q, {1.0, w0}, tight);
  out = build_graph(t, 0.0);
  out.params = params;
  for (auto& smp : out.samples) {
    smp.v = -smp.v;
    smp.dv = -smp.dv;
    smp.d2v = -smp.d2v;
  }
  return out;
}

}  // namespace soliton
