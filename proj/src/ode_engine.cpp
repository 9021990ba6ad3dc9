#include "soliton/ode_engine.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>

#include <boost/math/tools/roots.hpp>

#include "soliton/dopri5.hpp"
#include "soliton/errors.hpp"

namespace soliton {

namespace {

constexpr std::size_t kMaxSteps = 2'000'000;

bool barrier_chart(Chart c) { return c != Chart::Raw; }

double to_chart(Chart c, double w) {
  switch (c) {
    case Chart::Raw: return w;
    case Chart::Strip: return std::atanh(w);
    case Chart::GammaPlus:
    case Chart::GammaMinus: return std::atanh(1.0 / w);
  }
  return w;
}

double from_chart(Chart c, double y) {
  switch (c) {
    case Chart::Raw: return y;
    case Chart::Strip: return std::tanh(y);
    case Chart::GammaPlus:
    case Chart::GammaMinus: return 1.0 / std::tanh(y);
  }
  return y;
}

// dw/dy in the chart (1 - w^2 for both tanh and coth).
double chart_jacobian(Chart c, double y) {
  switch (c) {
    case Chart::Raw: return 1.0;
    case Chart::Strip: {
      const double ch = std::cosh(y);
      return 1.0 / (ch * ch);
    }
    case Chart::GammaPlus:
    case Chart::GammaMinus: {
      const double sh = std::sinh(y);
      return -1.0 / (sh * sh);
    }
  }
  return 1.0;
}

double chart_gap(Chart c, double y) {
  const double e = std::exp(-2.0 * std::abs(y));
  switch (c) {
    case Chart::Raw: return std::abs(std::abs(y) - 1.0);
    case Chart::Strip: return 2.0 * e / (1.0 + e);
    case Chart::GammaPlus:
    case Chart::GammaMinus: return 2.0 * e / (1.0 - e);
  }
  return 0.0;
}

Region chart_region(Chart c, double w) {
  switch (c) {
    case Chart::Strip: return Region::InnerStrip;
    case Chart::GammaPlus: return Region::GammaPlus;
    case Chart::GammaMinus: return Region::GammaMinus;
    case Chart::Raw: break;
  }
  return region_of({1.0, w});
}

double s_of(Axis a, double x) { return a == Axis::Log ? std::exp(x) : x; }
double x_of(Axis a, double s) { return a == Axis::Log ? std::log(s) : s; }

// Right-hand side in (axis, chart) coordinates.
double chart_rhs(const FlowParams& p, Chart c, Axis a, double x, double y) {
  const double s = s_of(a, x);
  const double w = from_chart(c, y);
  const double et = p.eps_tilde;
  if (barrier_chart(c)) {
    if (a == Axis::Log) return et * s - p.fiber_coeff * w;
    return et * (1.0 - w * p.h(s));
  }
  const double amp = et + p.eps_prime * w * w;
  if (a == Axis::Log) return amp * (s - et * p.fiber_coeff * w);
  return amp * (1.0 - w * p.h(s));
}

double poly_value(const DenseSegment& g, double x) {
  const double th = (x - g.x0) / g.h;
  const double th1 = 1.0 - th;
  const auto& r = g.rc;
  return r[0] + th * (r[1] + th1 * (r[2] + th * (r[3] + th1 * r[4])));
}

double poly_derivative(const DenseSegment& g, double x) {
  const double th = (x - g.x0) / g.h;
  const double th1 = 1.0 - th;
  const auto& r = g.rc;
  const double s = r[3] + th1 * r[4];
  const double rr = r[2] + th * s;
  const double dr = s - th * r[4];
  const double q = r[1] + th1 * rr;
  const double dq = -rr + th1 * dr;
  return (q + th * dq) / g.h;
}

TrajectorySample make_sample(const FlowParams& p, Chart c, double s, double y) {
  TrajectorySample out;
  out.s = s;
  out.w = from_chart(c, y);
  out.slope = rhs(p, s, out.w);
  out.barrier_gap = chart_gap(c, c == Chart::Raw ? out.w : y);
  out.region = chart_region(c, out.w);
  return out;
}

struct DirectionalRun {
  std::vector<TrajectorySample> samples;  // in integration order
  std::vector<DenseSegment> segments;     // in integration order
  std::vector<EventRecord> events;
  Termination term;
};

int sgn(double v) { return v > 0.0 ? 1 : (v < 0.0 ? -1 : 0); }

Chart chart_for(const FlowParams& p, double w) {
  if (!p.has_barriers()) return Chart::Raw;
  if (w > 1.0) return Chart::GammaPlus;
  if (w < -1.0) return Chart::GammaMinus;
  return Chart::Strip;
}

// s as a function of u = 1/w from the switch point through |w| = escape to u = 0.
void run_tail(const FlowParams& p, const IntegratorConfig& cfg, double s_sw, double w_sw,
              DirectionalRun& run) {
  const int sign = sgn(w_sw);
  const double et = p.eps_tilde;
  const double ep = p.eps_prime;
  auto g = [&](double u, const ode::Vec<1>& y) -> ode::Vec<1> {
    const double s = y[0];
    return {-u / ((et * u * u + ep) * (u - p.h(s)))};
  };
  auto valid = [](const ode::Vec<1>& y) { return y[0] > 0.0; };
  ode::StepControl ctl{.rel_tol = cfg.rel_tol, .abs_tol = cfg.abs_tol * 1e-2,
                       .max_step = 1.0, .min_step = 1e-300};
  auto stepper = ode::make_dopri5<1>(g, valid, ctl);

  const double u_esc = 1.0 / (sign * cfg.escape_threshold * (1.0 + 1e-9));
  stepper.reset(1.0 / w_sw, {s_sw}, u_esc);
  std::size_t steps = 0;
  while (stepper.x() != u_esc) {
    if (stepper.step(u_esc) != ode::StepStatus::Accepted || ++steps > kMaxSteps) {
      run.term = {TerminationKind::StepCollapse, stepper.y()[0], 1.0 / stepper.x()};
      run.events.push_back({EventKind::StepCollapse, run.term.s, run.term.w});
      return;
    }
    const double s = stepper.y()[0];
    const double w = 1.0 / stepper.x();
    TrajectorySample smp{s, w, rhs(p, s, w), std::abs(w) - 1.0, region_of({s, w})};
    run.samples.push_back(smp);
  }
  const double s_last = stepper.y()[0];
  const double w_last = 1.0 / stepper.x();
  // The reciprocal chart is regular at u = 0; one more leg gives s*.
  while (stepper.x() != 0.0) {
    if (stepper.step(0.0) != ode::StepStatus::Accepted) break;
  }
  const double s_star = stepper.y()[0];
  run.term = {TerminationKind::BlowUp, s_star, w_last, sign, std::abs(s_star - s_last)};
}

DirectionalRun run_direction(const FlowParams& p, PhaseState init, Direction dir,
                             const IntegratorConfig& cfg) {
  DirectionalRun run;
  const Chart chart = chart_for(p, init.w);
  const Axis axis =
      (dir == Direction::TowardZero && cfg.log_substitution) ? Axis::Log : Axis::Linear;
  const double s_end = dir == Direction::TowardZero ? cfg.s_min_eps : cfg.s_max;
  const double x_end = x_of(axis, s_end);
  const double fwd = dir == Direction::TowardInfinity ? 1.0 : -1.0;

  auto f = [&](double x, const ode::Vec<1>& y) -> ode::Vec<1> {
    return {chart_rhs(p, chart, axis, x, y[0])};
  };
  auto valid = [chart](const ode::Vec<1>& y) {
    if (chart == Chart::GammaPlus) return y[0] > 0.0;
    if (chart == Chart::GammaMinus) return y[0] < 0.0;
    return true;
  };
  ode::StepControl ctl{.rel_tol = cfg.rel_tol, .abs_tol = cfg.abs_tol,
                       .max_step = axis == Axis::Log ? 0.25 : cfg.max_step,
                       .min_step = cfg.min_step};
  auto stepper = ode::make_dopri5<1>(f, valid, ctl);
  const double y0 = to_chart(chart, init.w);
  stepper.reset(x_of(axis, init.s), {y0}, x_end);
  run.samples.push_back(make_sample(p, chart, init.s, y0));

  auto crit_gap = [&](double s, double w) { return w - critical_line(p, s); };

  std::size_t steps = 0;
  for (;;) {
    const auto status = stepper.step(x_end);
    const TrajectorySample& prev = run.samples.back();
    if (status != ode::StepStatus::Accepted || ++steps > kMaxSteps) {
      run.term = {TerminationKind::StepCollapse, prev.s, prev.w};
      run.events.push_back({EventKind::StepCollapse, prev.s, prev.w});
      return run;
    }
    const auto& d = stepper.last_dense();
    DenseSegment seg;
    seg.chart = chart;
    seg.axis = axis;
    seg.x0 = d.x0;
    seg.h = d.h;
    for (int k = 0; k < 5; ++k) seg.rc[k] = d.rc[k][0];
    const double sa = s_of(axis, d.x0);
    const double sb = stepper.x() == x_end ? s_end : s_of(axis, stepper.x());
    seg.s_lo = std::min(sa, sb);
    seg.s_hi = std::max(sa, sb);
    run.segments.push_back(seg);

    const TrajectorySample cur = make_sample(p, chart, sb, stepper.y()[0]);
    const double g_prev = crit_gap(prev.s, prev.w);
    const double g_cur = crit_gap(cur.s, cur.w);
    if (g_prev * g_cur < 0.0) {
      auto gfun = [&](double s) { return crit_gap(s, seg.w(s)); };
      std::uintmax_t iters = 200;
      auto [lo, hi] = boost::math::tools::toms748_solve(
          gfun, seg.s_lo, seg.s_hi, sa < sb ? g_prev : g_cur, sa < sb ? g_cur : g_prev,
          boost::math::tools::eps_tolerance<double>(52), iters);
      const double se = 0.5 * (lo + hi);
      run.events.push_back({EventKind::CrossedLineR, se, seg.w(se)});
    }
    run.samples.push_back(cur);

    if (barrier_chart(chart) && cur.barrier_gap == 0.0) {
      run.events.push_back({EventKind::TouchedBarrier, cur.s, cur.w});
      run.term = {TerminationKind::BarrierContact, cur.s, cur.w};
      return run;
    }
    if (stepper.x() == x_end) {
      run.term = {dir == Direction::TowardZero ? TerminationKind::DomainBoundaryZero
                                               : TerminationKind::ReachedSMax,
                  cur.s, cur.w};
      return run;
    }
    const bool growing = fwd * cur.w * cur.slope > 0.0;
    if (std::abs(cur.w) >= cfg.tail_switch && growing &&
        std::abs(1.0 / cur.w) <= 0.5 * std::abs(p.h(cur.s))) {
      run_tail(p, cfg, cur.s, cur.w, run);
      return run;
    }
  }
}

Trajectory constant_trajectory(const FlowParams& p, PhaseState init, Direction dir,
                               const IntegratorConfig& cfg) {
  Trajectory t;
  t.params = p;
  t.start = init;
  const double w = init.w > 0 ? 1.0 : -1.0;
  const Region reg = w > 0 ? Region::BarrierPlus : Region::BarrierMinus;
  const double s_end = dir == Direction::TowardZero ? cfg.s_min_eps : cfg.s_max;
  const double a = std::min(init.s, s_end), b = std::max(init.s, s_end);
  t.samples = {{a, w, 0.0, 0.0, reg}, {b, w, 0.0, 0.0, reg}};
  DenseSegment seg;
  seg.x0 = a;
  seg.h = b - a;
  seg.rc = {w, 0.0, 0.0, 0.0, 0.0};
  seg.s_lo = a;
  seg.s_hi = b;
  t.segments = {seg};
  const Termination end{dir == Direction::TowardZero ? TerminationKind::DomainBoundaryZero
                                                     : TerminationKind::ReachedSMax,
                        s_end, w};
  (dir == Direction::TowardZero ? t.left : t.right) = end;
  t.mark_constant();
  return t;
}

void validate_init(PhaseState init, Direction dir, const IntegratorConfig& cfg) {
  if (!(init.s > 0.0)) throw DomainError("initial s must be positive");
  if (!std::isfinite(init.w)) throw DomainError("initial w must be finite");
  if (dir == Direction::TowardInfinity && !(init.s < cfg.s_max))
    throw ParameterError("initial s must lie below s_max");
  if (dir == Direction::TowardZero && !(init.s > cfg.s_min_eps))
    throw ParameterError("initial s must lie above s_min_eps");
}

bool on_barrier(const FlowParams& p, double w) {
  return p.has_barriers() && std::abs(std::abs(w) - 1.0) <= kBarrierEquality;
}

}  // namespace

void IntegratorConfig::validate() const {
  if (!(rel_tol > 0.0) || !(abs_tol > 0.0)) throw ParameterError("tolerances must be positive");
  if (!(min_step > 0.0) || !(min_step < max_step))
    throw ParameterError("need 0 < min_step < max_step");
  if (!(escape_threshold > 1.0)) throw ParameterError("escape_threshold must exceed 1");
  if (!(s_min_eps > 0.0) || !(s_min_eps < s_max))
    throw ParameterError("need 0 < s_min_eps < s_max");
  if (!(tail_switch > 1.0) || !(tail_switch < escape_threshold))
    throw ParameterError("need 1 < tail_switch < escape_threshold");
}

std::string_view to_string(TerminationKind k) {
  switch (k) {
    case TerminationKind::NotIntegrated: return "NotIntegrated";
    case TerminationKind::BlowUp: return "BlowUp";
    case TerminationKind::DomainBoundaryZero: return "DomainBoundaryZero";
    case TerminationKind::ReachedSMax: return "ReachedSMax";
    case TerminationKind::BarrierContact: return "BarrierContact";
    case TerminationKind::StepCollapse: return "StepCollapse";
  }
  return "?";
}

std::string_view to_string(EventKind k) {
  switch (k) {
    case EventKind::CrossedLineR: return "CrossedLineR";
    case EventKind::TouchedBarrier: return "TouchedBarrier";
    case EventKind::StepCollapse: return "StepCollapse";
  }
  return "?";
}

std::string_view to_string(CausalSign c) {
  switch (c) {
    case CausalSign::Timelike: return "timelike";
    case CausalSign::Spacelike: return "spacelike";
    case CausalSign::Mixed: return "mixed";
  }
  return "?";
}

double DenseSegment::w(double s) const {
  return from_chart(chart, poly_value(*this, x_of(axis, s)));
}

double DenseSegment::slope(double s) const {
  const double x = x_of(axis, s);
  const double y = poly_value(*this, x);
  double d = poly_derivative(*this, x) * chart_jacobian(chart, y);
  if (axis == Axis::Log) d /= s;
  return d;
}

double DenseSegment::barrier_gap(double s) const {
  const double y = poly_value(*this, x_of(axis, s));
  return chart_gap(chart, chart == Chart::Raw ? from_chart(chart, y) : y);
}

double Trajectory::dense_lo() const { return segments.front().s_lo; }
double Trajectory::dense_hi() const { return segments.back().s_hi; }

const DenseSegment& Trajectory::segment_at(double s) const {
  if (segments.empty() || s < dense_lo() || s > dense_hi())
    throw DomainError("s = " + std::to_string(s) + " outside the dense output span");
  auto it = std::upper_bound(segments.begin(), segments.end(), s,
                             [](double v, const DenseSegment& g) { return v < g.s_lo; });
  if (it != segments.begin()) --it;
  return *it;
}

double Trajectory::w_at(double s) const { return segment_at(s).w(s); }
double Trajectory::slope_at(double s) const { return segment_at(s).slope(s); }
double Trajectory::gap_at(double s) const { return segment_at(s).barrier_gap(s); }

CausalSign Trajectory::causal_sign() const {
  int seen = 0;
  for (const auto& smp : samples) {
    int sign;
    if (params.has_barriers()) {
      if (smp.barrier_gap == 0.0) return CausalSign::Mixed;
      const bool outside = smp.region == Region::GammaPlus || smp.region == Region::GammaMinus;
      sign = params.eps_tilde * (outside ? 1 : -1);
    } else {
      sign = sgn(params.eps_prime + params.eps_tilde * smp.w * smp.w);
    }
    if (seen == 0) seen = sign;
    if (sign != seen || sign == 0) return CausalSign::Mixed;
  }
  return seen > 0 ? CausalSign::Timelike : CausalSign::Spacelike;
}

std::vector<double> Trajectory::critical_points() const {
  std::vector<double> out;
  for (const auto& e : events)
    if (e.kind == EventKind::CrossedLineR) out.push_back(e.s);
  std::sort(out.begin(), out.end());
  return out;
}

IntegrationResult integrate(const FlowParams& params, PhaseState init, Direction dir,
                            const IntegratorConfig& cfg) {
  cfg.validate();
  validate_init(init, dir, cfg);
  if (on_barrier(params, init.w)) {
    IntegrationResult r{constant_trajectory(params, init, dir, cfg), {}};
    return r;
  }
  DirectionalRun run = run_direction(params, init, dir, cfg);
  Trajectory t;
  t.params = params;
  t.start = init;
  if (dir == Direction::TowardZero) {
    std::reverse(run.samples.begin(), run.samples.end());
    std::reverse(run.segments.begin(), run.segments.end());
    t.left = run.term;
  } else {
    t.right = run.term;
  }
  t.samples = std::move(run.samples);
  t.segments = std::move(run.segments);
  std::sort(run.events.begin(), run.events.end(),
            [](const EventRecord& a, const EventRecord& b) { return a.s < b.s; });
  t.events = run.events;
  return {std::move(t), std::move(run.events)};
}

Trajectory integrate_both(const FlowParams& params, PhaseState init, const IntegratorConfig& cfg) {
  Trajectory left = integrate(params, init, Direction::TowardZero, cfg).trajectory;
  Trajectory right = integrate(params, init, Direction::TowardInfinity, cfg).trajectory;
  Trajectory t;
  t.params = params;
  t.start = init;
  t.samples = std::move(left.samples);
  t.samples.insert(t.samples.end(), right.samples.begin() + 1, right.samples.end());
  t.segments = std::move(left.segments);
  t.segments.insert(t.segments.end(), right.segments.begin(), right.segments.end());
  t.left = left.left;
  t.right = right.right;
  t.events = std::move(left.events);
  t.events.insert(t.events.end(), right.events.begin(), right.events.end());
  if (!on_barrier(params, init.w) &&
      std::abs(init.w - critical_line(params, init.s)) <= 1e-14 * std::max(1.0, std::abs(init.w)))
    t.events.push_back({EventKind::CrossedLineR, init.s, init.w});
  std::sort(t.events.begin(), t.events.end(),
            [](const EventRecord& a, const EventRecord& b) { return a.s < b.s; });
  // A start on the critical line is seen by both runs and by the check above.
  auto same = [](const EventRecord& a, const EventRecord& b) {
    return a.kind == b.kind && std::abs(a.s - b.s) <= 1e-9 * std::max(1.0, std::abs(a.s));
  };
  t.events.erase(std::unique(t.events.begin(), t.events.end(), same), t.events.end());
  if (left.is_constant()) t.mark_constant();
  return t;
}

std::vector<double> bowl_series_coeffs(const FlowParams& p, int order) {
  if (order < 1) throw ParameterError("series order must be >= 1");
  const double et = p.eps_tilde, ep = p.eps_prime, c = p.fiber_coeff;
  const auto n = static_cast<std::size_t>(order);
  std::vector<double> a(n + 1, 0.0), sq(n + 1, 0.0), q(n + 1, 0.0);
  // s w' = (et + ep w^2)(s - et c w); sq = w^2, q = s - et c w.
  for (std::size_t k = 1; k <= n; ++k) {
    double acc = (k == 1) ? et : 0.0;
    for (std::size_t j = 2; j + 1 <= k; ++j) acc += ep * sq[j] * q[k - j];
    a[k] = acc / (double(k) + c);
    q[k] = (k == 1 ? 1.0 : 0.0) - et * c * a[k];
    for (std::size_t i = 1; i < k; ++i) sq[k] += a[i] * a[k - i];
  }
  return a;
}

double eval_series(const std::vector<double>& coeffs, double s) {
  double acc = 0.0;
  for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * s + *it;
  return acc;
}

PhaseState bowl_start(const FlowParams& params, double s_start, int order, double tol) {
  if (s_start < 0.0) throw DomainError("series start must be >= 0");
  const int next = (order % 2 == 0) ? order + 1 : order + 2;
  const auto a = bowl_series_coeffs(params, next);
  const double omitted = std::abs(a[next]) * std::pow(s_start, next);
  if (!(omitted < tol))
    throw PrecisionError("series start s = " + std::to_string(s_start) +
                         " too large for order " + std::to_string(order) +
                         " (omitted term " + std::to_string(omitted) + ")");
  std::vector<double> kept(a.begin(), a.begin() + order + 1);
  return {s_start, eval_series(kept, s_start)};
}

std::optional<BlowupInfo> detect_blowup(const Trajectory& traj) {
  const Termination* t = nullptr;
  Direction side = Direction::TowardInfinity;
  if (traj.right.kind == TerminationKind::BlowUp) {
    t = &traj.right;
  } else if (traj.left.kind == TerminationKind::BlowUp) {
    t = &traj.left;
    side = Direction::TowardZero;
  }
  if (!t) return std::nullopt;
  BlowupInfo info{t->s, t->sign, side, std::nullopt};
  const auto& p = traj.params;
  const double w0 = traj.start.w;
  if (side == Direction::TowardInfinity && p.eps_tilde == 1 && p.eps_prime == -1 && w0 < -1.0) {
    // z = coth(s + rho) through (s0, w0) dominates; it blows up at -rho.
    info.comparison_bound = traj.start.s - 0.5 * std::log((w0 + 1.0) / (w0 - 1.0));
  }
  return info;
}

}  // namespace soliton
