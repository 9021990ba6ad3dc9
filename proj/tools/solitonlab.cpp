// solitonlab: command-line front end for the translator library.
//
// Exit codes: 0 success, 1 verification failure (or a failed search),
// 2 configuration / domain error.

#include <fmt/format.h>

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "soliton/classifier.hpp"
#include "soliton/emitter.hpp"
#include "soliton/errors.hpp"
#include "soliton/geometry.hpp"
#include "soliton/verifier.hpp"

using namespace soliton;
using emit::num;
using json = nlohmann::ordered_json;

namespace {

constexpr double kOrderLo = 1.7, kOrderHi = 2.3;

// ------------------------------------------------------------ options

struct Common {
  std::string action = "so_n";
  std::string region;  // empty: strip (so_n) or timelike_T (boost)
  int n = 3;
  bool strict = false;
  bool as_json = false;
  std::string out;
  IntegratorConfig integ;

  void add(CLI::App* c, bool with_out = true) {
    c->add_option("--action", action, "so_n or boost")->check(CLI::IsMember({"so_n", "boost"}));
    c->add_option("--region", region, "strip, gamma_plus, gamma_minus, spacelike_S, timelike_T");
    c->add_option("--n", n, "dimension parameter n");
    c->add_flag("--strict-fiber-coeff", strict, "boost action: use fiber coefficient 1");
    c->add_flag("--json", as_json, "print a JSON report");
    c->add_option("--rel-tol", integ.rel_tol);
    c->add_option("--abs-tol", integ.abs_tol);
    c->add_option("--s-max", integ.s_max, "right end of the integration span");
    c->add_option("--s-min", integ.s_min_eps, "left cutoff toward s = 0");
    if (with_out) c->add_option("--out", out, "output file");
  }

  emit::RunConfig run() const {
    emit::RunConfig r;
    r.action = emit::parse_action(action);
    r.region = region.empty() ? (r.action == emit::Action::SoN ? emit::RegionSel::Strip
                                                               : emit::RegionSel::TimelikeT)
                              : emit::parse_region(region);
    r.n = n;
    r.strict_fiber_coeff = strict;
    r.integrator = integ;
    r.validate();
    return r;
  }
};

void emit_text(const std::string& out, const std::string& text) {
  if (out.empty())
    std::cout << text;
  else
    emit::write_file(out, text);
}

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> v;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, ',');) {
    try {
      std::size_t used = 0;
      v.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError("cannot parse number '" + item + "'");
    }
  }
  return v;
}

json limit_json(const EndpointLimit& e) {
  json j;
  switch (e.kind) {
    case EndpointLimit::Kind::Value: j["kind"] = "value"; break;
    case EndpointLimit::Kind::BlowUp: j["kind"] = "blowup"; break;
    case EndpointLimit::Kind::Unbounded: j["kind"] = "unbounded"; break;
  }
  j["value"] = e.value;
  j["tolerance"] = e.tolerance;
  j["sign"] = e.sign;
  j["s"] = e.s;
  return j;
}

std::string limit_text(const EndpointLimit& e) {
  switch (e.kind) {
    case EndpointLimit::Kind::Value:
      return fmt::format("w -> {:.10g} (+- {:.2g}, read at s = {:.3g})", e.value, e.tolerance, e.s);
    case EndpointLimit::Kind::BlowUp:
      return fmt::format("blow-up to {}inf at s* = {:.10g}", e.sign > 0 ? "+" : "-", e.value);
    case EndpointLimit::Kind::Unbounded:
      return fmt::format("unbounded growth ({}), w = {:.6g} at s = {:.3g}", e.sign > 0 ? "+" : "-",
                         e.value, e.s);
  }
  return "?";
}

// Piecewise cubic Hermite through profile samples (x, v, dv).
emit::Profile hermite(const ProfileCurve& c) {
  auto smp = c.samples;
  return [smp](double x) {
    auto it = std::upper_bound(smp.begin(), smp.end(), x,
                               [](double v, const ProfileSample& s) { return v < s.x; });
    if (it == smp.begin()) return smp.front().v;
    if (it == smp.end()) return smp.back().v;
    const auto& a = *(it - 1);
    const auto& b = *it;
    const double h = b.x - a.x, t = (x - a.x) / h;
    const double h00 = (1 + 2 * t) * (1 - t) * (1 - t), h10 = t * (1 - t) * (1 - t),
                 h01 = t * t * (3 - 2 * t), h11 = t * t * (t - 1);
    return h00 * a.v + h10 * h * a.dv + h01 * b.v + h11 * h * b.dv;
  };
}

ProfileCurve sample_graph(const GraphFunction& g, const FlowParams& p, double a, double b,
                          int count) {
  ProfileCurve c;
  c.kind = Parametrization::GraphOverS;
  c.params = p;
  for (int i = 0; i < count; ++i) {
    const double s = count == 1 ? a : a + (b - a) * i / (count - 1);
    c.samples.push_back({s, g.f(s), g.df(s), g.d2f(s)});
  }
  return c;
}

GraphFunction bowl_graph(const FlowParams& p, const IntegratorConfig& cfg) {
  const auto b = compute_bowl(p, cfg);
  return GraphFunction(b.series, b.s_join, b.trajectory);
}

// ------------------------------------------------------------ commands

int cmd_classify(const Common& o, double s0, double w0) {
  const auto rc = o.run();
  const auto p = rc.params();
  if (!(s0 > 0.0)) throw DomainError("s0 must be positive");
  const Classifier cl(p, rc.integrator);
  const auto c = cl.classify(s0, w0);
  const auto& ev = c.evidence;
  if (o.as_json) {
    json j;
    j["s0"] = s0;
    j["w0"] = w0;
    j["class"] = std::string(to_string(c.tag));
    j["limit_at_zero"] = limit_json(ev.limits.at_zero);
    j["limit_at_infinity"] = limit_json(ev.limits.at_infinity);
    j["critical_points"] = ev.critical_points;
    j["causal_sign"] = std::string(to_string(ev.causal_sign));
    j["monotone"] = ev.monotone;
    if (ev.reference) j["reference"] = *ev.reference;
    if (ev.blowup) {
      j["blowup"]["s_star"] = ev.blowup->s_star;
      j["blowup"]["sign"] = ev.blowup->sign;
      if (ev.blowup->comparison_bound) j["blowup"]["bound"] = *ev.blowup->comparison_bound;
    }
    std::cout << j.dump(2) << "\n";
  } else {
    fmt::print("class: {}\n", to_string(c.tag));
    fmt::print("s -> 0:   {}\n", limit_text(ev.limits.at_zero));
    fmt::print("s -> inf: {}\n", limit_text(ev.limits.at_infinity));
    fmt::print("critical points: {}\n", ev.critical_points.size());
    for (double s : ev.critical_points)
      fmt::print("  s = {:.10g}, critical_concavity = {:.6g}\n", s, critical_concavity(p, s));
    fmt::print("causal sign: {}\n", to_string(ev.causal_sign));
    if (ev.reference) fmt::print("reference solution at s0: {:.12g}\n", *ev.reference);
    if (ev.blowup) {
      fmt::print("blow-up: s* = {:.10g}\n", ev.blowup->s_star);
      if (ev.blowup->comparison_bound)
        fmt::print("blow-up bound: s* < {:.10g}\n", *ev.blowup->comparison_bound);
    }
  }
  if (!o.out.empty()) {
    std::string csv = "s,w\n";
    const auto& t = c.trajectory;
    const double sign = p.eps_tilde == -1 ? -1.0 : 1.0;
    for (const auto& smp : t.samples) csv += num(smp.s) + "," + num(sign * smp.w) + "\n";
    emit::write_file(o.out, csv);
  }
  return 0;
}

int cmd_portrait(const Common& o, emit::PortraitRequest req, bool w_given) {
  const auto rc = o.run();
  if (!w_given) {
    if (rc.region == emit::RegionSel::GammaPlus) req.w_lo = 1.05, req.w_hi = 4.0;
    if (rc.region == emit::RegionSel::GammaMinus) req.w_lo = -4.0, req.w_hi = -1.05;
  }
  emit_text(o.out, emit::portrait_csv(rc, req));
  return 0;
}

int cmd_bowl(const Common& o, int samples, double s_hi) {
  const auto rc = o.run();
  const auto p = rc.params();
  if (!p.has_barriers()) throw DomainError("the bowl needs the barrier case (strip region)");
  const auto b = compute_bowl(p, rc.integrator);
  const GraphFunction g(b.series, b.s_join, b.trajectory);
  const double hi = std::min(s_hi, g.s_hi());
  const double probe = 1e-3;
  const double series_gap = std::abs(b.trajectory.w_at(probe) - eval_series(b.series, probe));
  const double far = std::min(50.0, b.trajectory.dense_hi());
  if (o.as_json) {
    json j;
    j["n"] = p.n;
    j["series"] = b.series;
    j["s_join"] = b.s_join;
    j["series_gap_at_1e-3"] = series_gap;
    j["w_at_50"] = b.trajectory.w_at(far);
    std::cout << j.dump(2) << "\n";
  } else {
    fmt::print("bowl n = {}: a1 = {:.17g}, a3 = {:.17g}\n", p.n, b.series.at(1), b.series.at(3));
    fmt::print("series join at s = {:.3g}; |w(1e-3) - series| = {:.3g}\n", b.s_join, series_gap);
    fmt::print("w({:.4g}) = {:.12g}\n", far, b.trajectory.w_at(far));
  }
  if (!o.out.empty()) emit::write_file(o.out, emit::profile_csv(sample_graph(g, p, 0.0, hi, samples)));
  return 0;
}

int cmd_separatrix(const Common& o) {
  const auto rc = o.run();
  const auto p = rc.params();
  const auto sp = compute_separatrix(p, rc.integrator);
  const double S = std::min(sp.defect_from, sp.trajectory.dense_hi());
  const double d = std::abs(p.fiber_coeff * sp.w(S) - S);
  if (o.as_json) {
    json j;
    j["anchor"] = sp.anchor;
    j["value"] = sp.value;
    j["bracket"] = {sp.bracket_lo, sp.bracket_hi};
    j["bisections"] = sp.bisections;
    j["backward_value"] = sp.backward_value;
    j["defect_at"] = S;
    j["defect"] = d;
    std::cout << j.dump(2) << "\n";
  } else {
    fmt::print("separatrix at s = {:.10g}: w = {:.15g}\n", sp.anchor, sp.value);
    fmt::print("bracket [{:.15g}, {:.15g}] width {:.3g} after {} bisections\n", sp.bracket_lo,
               sp.bracket_hi, sp.bracket_hi - sp.bracket_lo, sp.bisections);
    fmt::print("backward sweep value {:.15g}\n", sp.backward_value);
    fmt::print("|c w(s) - s| at s = {:.4g}: {:.4g}\n", S, d);
  }
  if (!o.out.empty()) {
    std::string csv = "s,w\n";
    for (const auto& smp : sp.trajectory.samples) csv += num(smp.s) + "," + num(smp.w) + "\n";
    emit::write_file(o.out, csv);
  }
  return 0;
}

FlowParams wing_params(int n, const std::string& ambient) {
  if (ambient == "minkowski") return FlowParams::rotational_minkowski(n);
  if (ambient == "euclidean") return FlowParams::rotational_euclidean(n);
  throw ConfigError("ambient must be minkowski or euclidean");
}

int cmd_wing(const Common& o, double s0, const std::string& ambient) {
  if (!(s0 > 0.0)) throw DomainError("s0 must be positive");
  const auto p = wing_params(o.n, ambient);
  const auto w = build_wing(p, s0);
  if (o.as_json) {
    json j;
    j["s0"] = s0;
    j["y_range"] = {w.y_lo, w.y_hi};
    j["end_lo"] = std::string(to_string(w.end_lo));
    j["end_hi"] = std::string(to_string(w.end_hi));
    j["alpha_second_at_apex"] = w.alpha.alpha_second(w.y0);
    std::cout << j.dump(2) << "\n";
  } else {
    fmt::print("wing apex alpha({:.6g}) = {:.10g}, alpha'' = {:.10g}\n", w.y0, s0,
               w.alpha.alpha_second(w.y0));
    fmt::print("y in [{:.10g}, {:.10g}]; ends: {} / {}\n", w.y_lo, w.y_hi, to_string(w.end_lo),
               to_string(w.end_hi));
  }
  if (!o.out.empty()) emit::write_file(o.out, emit::profile_csv(w.curve));
  return 0;
}

int cmd_spindle(const Common& o, double s0) {
  if (!(s0 > 0.0)) throw DomainError("s0 must be positive");
  const auto sp = build_spindle(FlowParams::rotational_minkowski(o.n), s0);
  if (o.as_json) {
    json j;
    j["closed"] = sp.closed;
    j["axis"] = {sp.y_axis_lo, sp.y_axis_hi};
    j["slopes"] = {sp.slope_lo, sp.slope_hi};
    j["y_range"] = {sp.wing.y_lo, sp.wing.y_hi};
    std::cout << j.dump(2) << "\n";
  } else {
    fmt::print("spindle s0 = {}: {}\n", s0, sp.closed ? "closed" : "open");
    fmt::print("y in [{:.10g}, {:.10g}], axis contacts {:.10g} / {:.10g}\n", sp.wing.y_lo,
               sp.wing.y_hi, sp.y_axis_lo, sp.y_axis_hi);
    fmt::print("end slopes alpha' = {:.10g} / {:.10g}\n", sp.slope_lo, sp.slope_hi);
  }
  if (!o.out.empty()) emit::write_file(o.out, emit::profile_csv(sp.wing.curve));
  return sp.closed ? 0 : 1;
}

HybridConfig hybrid_config(const Common& o, int order, const std::string& quadrants, double fiber) {
  HybridConfig hc;
  hc.n = o.n;
  hc.order = order;
  hc.fiber_coeff = o.strict ? 1.0 : fiber;
  hc.mask = QuadrantMask::parse(quadrants);
  hc.integrator = o.integ;
  return hc;
}

int cmd_hybrid(const Common& o, const HybridConfig& hc, const GridSpec& grid) {
  auto b = build_hybrid(hc, grid);
  const auto& f = b.field;
  std::vector<std::vector<double>> xs;
  std::vector<double> ys;
  for (double a = -1.0; a <= 1.0; a += 0.25)
    for (double c = -1.0; c <= 1.0; c += 0.25) {
      std::vector<double> x(std::max(1, hc.n - 1), 0.3 * c);
      x[0] = a;
      xs.push_back(x);
      ys.push_back(0.9 * c);
    }
  const double defect = boost_invariance_defect(f, xs, ys, {-1.0, -0.5, 0.5, 1.0});
  if (o.as_json) {
    json j;
    j["f1_taylor"] = f.f1_taylor();
    j["f2_taylor"] = f.f2_taylor();
    j["series_radius"] = f.series_radius();
    j["boost_defect"] = defect;
    std::cout << j.dump(2) << "\n";
  } else {
    fmt::print("quadrants {}; series radius {:.4g}\n", hc.mask.to_string(), f.series_radius());
    fmt::print("{:>3} {:>24} {:>24}\n", "2k", "f1^(2k)(0)/(2k)!", "f2^(2k)(0)/(2k)!");
    for (std::size_t k = 0; k < f.f1_taylor().size(); k += 2)
      fmt::print("{:>3} {:>24.17g} {:>24.17g}\n", k, f.f1_taylor()[k], f.f2_taylor()[k]);
    fmt::print("boost invariance defect {:.3g}\n", defect);
  }
  if (!o.out.empty()) {
    std::string csv = "x,y,u\n";
    for (std::size_t i = 0; i < b.sample.size(); ++i) {
      const auto c = b.sample.coords(i);
      csv += num(c[0]) + "," + num(c[1]) + "," + num(b.sample.values()[i]) + "\n";
    }
    emit::write_file(o.out, csv);
  }
  return 0;
}

struct MeshArgs {
  std::string target = "bowl";
  int angular = 64;
  int profile_samples = 200;
  double s_lo = 0.0, s_hi = 2.0;
  int quadrant = 0;
  double theta_max = 1.5;
  double s0 = 1.0, w0 = 0.0;
  std::string family = "bowl";
  double lo = -2.0, hi = 2.0;
  int count = 201;
  std::string quadrants = "1234";
  int order = 12;
};

void add_provenance(emit::MeshOutput& m, const FlowParams& p, const std::string& cls,
                    const std::string& how) {
  m.metadata.insert(m.metadata.begin(),
                    {{"params", fmt::format("n={} eps_prime={} eps_tilde={} c={}", p.n, p.eps_prime,
                                            p.eps_tilde, num(p.fiber_coeff))},
                     {"class", cls},
                     {"provenance", how}});
}

std::string profile_path(const std::string& out) {
  auto dot = out.rfind('.');
  auto slash = out.rfind('/');
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) return out + ".csv";
  return out.substr(0, dot) + ".csv";
}

int cmd_mesh(const Common& o, const MeshArgs& a) {
  if (o.out.empty()) throw ConfigError("mesh needs --out");
  const auto rc = o.run();
  emit::MeshOutput m;

  if (a.target == "hybrid") {
    HybridConfig hc = hybrid_config(o, a.order, a.quadrants, 1.0);
    hc.n = 2;
    hc.s_max = 1.01 * std::max(std::abs(a.lo), std::abs(a.hi)) * std::sqrt(2.0);
    const HybridField f(hc);
    m = emit::mesh_hybrid(f, a.lo, a.hi, a.count);
    add_provenance(m, FlowParams::boost(2, +1, true), "hybrid",
                   fmt::format("Taylor order {} glued to integration", a.order));
  } else if (a.target == "spindle") {
    const auto sp = build_spindle(FlowParams::rotational_minkowski(o.n), a.s0);
    if (o.n != 2) {
      const auto path = profile_path(o.out);
      emit::write_file(path, emit::profile_csv(sp.wing.curve));
      fmt::print("n = {} has no 3D embedding; wrote profile {}\n", o.n, path);
      return 0;
    }
    m = emit::mesh_spindle(sp, a.angular, a.profile_samples);
    add_provenance(m, sp.wing.curve.params, "spindle", "wing ODE over y, axis points extrapolated");
  } else {
    const auto p = rc.params();
    std::string cls, how;
    emit::Profile f;
    ProfileCurve curve;
    double s_lo = a.s_lo, s_hi = a.s_hi;
    if (a.target == "bowl") {
      if (!p.has_barriers()) throw DomainError("the bowl needs the barrier case");
      auto g = std::make_shared<GraphFunction>(bowl_graph(p, rc.integrator));
      if (p.eps_tilde == -1) {
        // timelike boost picture: f = -q
        f = [g](double s) { return -g->f(s); };
      } else {
        f = [g](double s) { return g->f(s); };
      }
      s_hi = std::min(s_hi, g->s_hi());
      cls = "Bowl";
      how = "odd series at s = 0 joined to DOPRI5";
      curve = sample_graph(*g, p, s_lo, s_hi, a.profile_samples);
      if (p.eps_tilde == -1)
        for (auto& s : curve.samples) s.v = -s.v, s.dv = -s.dv, s.d2v = -s.d2v;
    } else if (a.target == "timelike") {
      if (rc.region != emit::RegionSel::TimelikeT) throw ConfigError("timelike target needs --action boost");
      const SolutionTag tag = a.family == "bowl"    ? SolutionTag::Bowl
                              : a.family == "below" ? SolutionTag::BelowBowl
                              : a.family == "above" ? SolutionTag::AboveBowl
                                                    : throw ConfigError("family: bowl, below, above");
      curve = timelike_family_from_strip(p, tag, rc.integrator);
      f = hermite(curve);
      s_lo = std::max(s_lo, curve.samples.front().x);
      s_hi = std::min(s_hi, curve.samples.back().x);
      cls = std::string(to_string(tag));
      how = "strip solution q mapped to f = -q";
    } else if (a.target == "trajectory") {
      if (!(a.s0 > 0.0)) throw DomainError("s0 must be positive");
      const auto t = integrate_both(p, {a.s0, a.w0}, rc.integrator);
      auto g = std::make_shared<GraphFunction>(t, a.s0, 0.0);
      f = [g](double s) { return g->f(s); };
      s_lo = std::max(s_lo, g->s_lo());
      s_hi = std::min(s_hi, g->s_hi());
      cls = p.has_barriers() ? std::string(to_string(classify(p, a.s0, a.w0, rc.integrator).tag))
                             : "unclassified";
      how = fmt::format("integrated from (s0, w0) = ({}, {})", num(a.s0), num(a.w0));
      curve = sample_graph(*g, p, s_lo, s_hi, a.profile_samples);
    } else {
      throw ConfigError("unknown mesh target '" + a.target + "'");
    }
    if (!(s_hi > s_lo)) throw DomainError("empty profile range");
    if (rc.n != 2) {
      const auto path = profile_path(o.out);
      emit::write_file(path, emit::profile_csv(curve));
      fmt::print("n = {} has no 3D embedding; wrote profile {}\n", rc.n, path);
      return 0;
    }
    if (rc.action == emit::Action::SoN) {
      m = emit::mesh_rotational(f, s_lo, s_hi, a.angular, a.profile_samples);
    } else {
      const int q = a.quadrant ? a.quadrant : (rc.region == emit::RegionSel::SpacelikeS ? 1 : 2);
      m = emit::mesh_boost(f, s_lo, s_hi, q, a.theta_max, a.angular, a.profile_samples);
    }
    add_provenance(m, p, cls, how);
  }
  emit::write_file(o.out, m.to_obj());
  fmt::print("wrote {}: {} vertices, {} faces, {} polylines, {} degenerate skipped\n", o.out,
             m.vertices.size(), m.faces.size(), m.polylines.size(), m.skipped_degenerate);
  return 0;
}

// ------------------------------------------------------------ verify

struct VerifyArgs {
  std::string target;
  std::string hs = "0.04,0.02,0.01";
  double L = 1.0;
  int order = 2;
  std::string quadrants = "1234";
  bool mismatched = false;
  int taylor = 12;
};

json order_json(const OrderReport& r) {
  return {{"defined", r.defined}, {"p", r.p}, {"p_check", r.p_check}, {"note", r.note}};
}

int finish_verify(const Common& o, json report, bool pass, const std::string& why) {
  report["result"] = pass ? "PASS" : "FAIL";
  if (!pass) report["reason"] = why;
  if (o.as_json)
    std::cout << report.dump(2) << "\n";
  else
    fmt::print("{}{}\n", pass ? "PASS" : "FAIL", pass ? "" : ": " + why);
  if (!o.out.empty()) emit::write_file(o.out, report.dump(2) + "\n");
  return pass ? 0 : 1;
}

bool order_ok(const OrderReport& r) { return r.defined && r.p >= kOrderLo && r.p <= kOrderHi; }

int cmd_verify(const Common& o, const VerifyArgs& v) {
  const auto hs = parse_list(v.hs);
  json rep;
  rep["target"] = v.target;
  rep["h"] = hs;

  if (v.target == "const") {
    const auto ax = GridAxis::span(-1.0, 1.0, hs.empty() ? 0.1 : hs.front());
    const auto g = GridField::sample({ax, ax}, {1, 1}, 1, [](auto) { return 0.0; });
    const auto r = residual_fund_eq(g);
    double lo = INFINITY, hi = -INFINITY;
    for (double x : r.residual)
      if (!std::isnan(x)) lo = std::min(lo, x), hi = std::max(hi, x);
    rep["residual_min"] = lo;
    rep["residual_max"] = hi;
    if (!o.as_json) fmt::print("constant field: R in [{}, {}] over {} nodes\n", lo, hi, r.evaluated);
    return finish_verify(o, rep, r.max_abs <= 1e-12, fmt::format("R = {} everywhere, not a soliton", hi));
  }

  if (hs.size() != 3) throw ConfigError("--h needs three spacings h, h/2, h/4");
  std::vector<double> res;
  json rows = json::array();

  if (v.target == "bowl") {
    const auto p = FlowParams::rotational_minkowski(o.n);
    const auto g = bowl_graph(p, o.integ);
    if (!o.as_json) fmt::print("{:>8} {:>12} {:>12} {:>10}\n", "h", "max|R|", "mean|R|", "nodes");
    for (double h : hs) {
      const auto field = sample_radial(g, o.n, v.L, h, std::vector<int>(o.n, 1), -1);
      const auto r = residual_fund_eq(field);
      res.push_back(r.max_abs);
      rows.push_back({{"h", h}, {"max", r.max_abs}, {"mean", r.mean_abs}, {"nodes", r.evaluated}});
      if (!o.as_json)
        fmt::print("{:>8} {:>12.4g} {:>12.4g} {:>10}\n", h, r.max_abs, r.mean_abs, r.evaluated);
    }
    const auto ord = convergence_order(res[0], res[1], res[2]);
    rep["residuals"] = rows;
    rep["order"] = order_json(ord);
    if (!o.as_json) fmt::print("order p = {:.4f} (check {:.4f}) {}\n", ord.p, ord.p_check, ord.note);
    return finish_verify(o, rep, order_ok(ord), fmt::format("order {:.3f} outside [{}, {}]", ord.p, kOrderLo, kOrderHi));
  }

  if (v.target == "hybrid") {
    HybridConfig hc = hybrid_config(o, v.taylor, v.quadrants, 1.0);
    hc.n = 2;
    std::vector<std::vector<double>> jumps;
    std::vector<std::string> warnings;
    if (!o.as_json) fmt::print("{:>8} {:>12} {:>12}   jumps by order\n", "h", "max|R|", "mean|R|");
    for (double h : hs) {
      const GridSpec grid{-2.0, 2.0, h};
      auto b = build_hybrid(hc, grid);
      const GridField sample = v.mismatched ? sample_hybrid(b.field.mismatched(), grid) : b.sample;
      json row{{"h", h}};
      try {
        const auto r = residual_fund_eq(sample);
        res.push_back(r.max_abs);
        row["max"] = r.max_abs;
        row["mean"] = r.mean_abs;
      } catch (const DegeneracyError& e) {
        res.push_back(NAN);
        row["residual_error"] = e.what();
      }
      const auto sm = smoothness_scan(sample, v.order, 2);
      std::vector<double> js;
      for (const auto& j : sm.jumps) js.push_back(j.max_jump);
      for (const auto& w : sm.warnings) warnings.push_back(w);
      row["jumps"] = js;
      row["used_order"] = sm.used_order;
      rows.push_back(row);
      jumps.push_back(js);
      if (!o.as_json) {
        std::string line = fmt::format("{:>8} {:>12.4g} {:>12.4g}  ", h, res.back(),
                                       row.value("mean", NAN));
        for (double x : js) line += fmt::format(" {:>10.3g}", x);
        fmt::print("{}\n", line);
      }
    }
    rep["residuals"] = rows;
    rep["warnings"] = warnings;
    std::string why;
    bool pass = true;
    if (std::any_of(res.begin(), res.end(), [](double x) { return std::isnan(x); })) {
      pass = false;
      why = "residual undefined (degenerate W)";
    } else {
      const auto ord = convergence_order(res[0], res[1], res[2]);
      rep["order"] = order_json(ord);
      if (!o.as_json) fmt::print("residual order p = {:.4f} (check {:.4f}) {}\n", ord.p, ord.p_check, ord.note);
      if (!order_ok(ord)) pass = false, why = fmt::format("residual order {:.3f}", ord.p);
    }
    // Jumps of order >= 1 must decay at least like h^kOrderLo; order 0 is
    // continuity and must vanish.
    const std::size_t k = std::min({jumps[0].size(), jumps[1].size(), jumps[2].size()});
    json rates = json::array();
    for (std::size_t m = 0; m < k; ++m) {
      const double j0 = jumps[0][m], j1 = jumps[1][m], j2 = jumps[2][m];
      if (m == 0) {
        rates.push_back(nullptr);
        if (std::max({j0, j1, j2}) > 1e-12) pass = false, why = "u is discontinuous across the cone";
        continue;
      }
      const double r1 = std::log2(j0 / j1), r2 = std::log2(j1 / j2);
      rates.push_back({r1, r2});
      if (!o.as_json) fmt::print("order {} jump decay rates {:.3f}, {:.3f}\n", m, r1, r2);
      if (!(std::min(r1, r2) >= kOrderLo) && pass)
        pass = false, why = fmt::format("order {} jump does not decay (rates {:.2f}, {:.2f})", m, r1, r2);
    }
    if (static_cast<int>(k) <= v.order && pass)
      pass = false, why = fmt::format("scan capped at order {}", static_cast<int>(k) - 1);
    rep["jump_rates"] = rates;
    return finish_verify(o, rep, pass, why);
  }
  throw ConfigError("verify target must be bowl, hybrid or const");
}

// ------------------------------------------------------------ config file

// Flattens a JSON object into "--key value" pairs placed right after the
// subcommand, so explicit flags (parsed later, last one wins) override it.
std::vector<std::string> config_args(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("bad config: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  std::vector<std::string> out;
  for (const auto& [k, v] : j.items()) {
    const std::string flag = "--" + k;
    if (v.is_boolean()) {
      if (v.get<bool>()) out.push_back(flag);
    } else if (v.is_array()) {
      std::string joined;
      for (const auto& x : v) joined += (joined.empty() ? "" : ",") + (x.is_string() ? x.get<std::string>() : x.dump());
      out.push_back(flag);
      out.push_back(joined);
    } else if (v.is_string()) {
      out.push_back(flag);
      out.push_back(v.get<std::string>());
    } else if (v.is_number()) {
      out.push_back(flag);
      out.push_back(v.dump());
    } else {
      throw ConfigError("config key '" + k + "' has an unsupported type");
    }
  }
  return out;
}

std::vector<std::string> expand_config(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  std::vector<std::string> rest;
  std::optional<std::string> path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) throw ConfigError("--config needs a file");
      path = args[++i];
    } else if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
    } else {
      rest.push_back(args[i]);
    }
  }
  if (path) {
    const auto extra = config_args(*path);
    const auto at = rest.empty() ? rest.end() : rest.begin() + 1;
    rest.insert(at, extra.begin(), extra.end());
  }
  std::reverse(rest.begin(), rest.end());  // CLI11 takes vectors in reverse order
  return rest;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Translating solitons of mean curvature flow: classify, construct, verify."};
  app.set_help_flag("--help", "print help");  // -h is taken by the grid spacing
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.set_help_all_flag("--help-all");
  std::string config_note;
  app.add_option("--config", config_note, "JSON file of option values (flags win)");

  Common co;
  double s0 = 1.0, w0 = 0.0;

  auto* classify_cmd = app.add_subcommand("classify", "classify the solution through (s0, w0)");
  co.add(classify_cmd);
  classify_cmd->add_option("--s0", s0)->required();
  classify_cmd->add_option("--w0", w0)->required();

  emit::PortraitRequest pr;
  auto* portrait = app.add_subcommand("portrait", "phase portrait CSV over a grid of initial data");
  co.add(portrait);
  portrait->add_option("--ns", pr.ns);
  portrait->add_option("--nw", pr.nw);
  portrait->add_option("--s-lo", pr.s_lo);
  portrait->add_option("--s-hi", pr.s_hi);
  auto* wlo = portrait->add_option("--w-lo", pr.w_lo);
  auto* whi = portrait->add_option("--w-hi", pr.w_hi);
  portrait->add_option("--samples", pr.samples, "output samples per trajectory");
  portrait->add_option("--threads", pr.threads);

  int samples = 401;
  double s_hi = 10.0;
  auto* bowl = app.add_subcommand("bowl", "the bowl solution and its profile");
  co.add(bowl);
  bowl->add_option("--samples", samples);
  bowl->add_option("--profile-s-max", s_hi);

  auto* sep = app.add_subcommand("separatrix", "the separatrix in the region w > 1");
  co.add(sep);

  std::string ambient = "minkowski";
  auto* wing = app.add_subcommand("wing", "wing-like profile through the apex alpha = s0");
  co.add(wing);
  wing->add_option("--s0", s0);
  wing->add_option("--ambient", ambient)->check(CLI::IsMember({"minkowski", "euclidean"}));

  auto* spindle = app.add_subcommand("spindle", "closed timelike profile (spindle)");
  co.add(spindle);
  spindle->add_option("--s0", s0);

  int order = 12;
  std::string quadrants = "1234";
  double fiber = 1.0;
  GridSpec grid;
  auto* hybrid = app.add_subcommand("hybrid", "hybrid translator glued across the light cone");
  co.add(hybrid);
  hybrid->add_option("--order", order, "Taylor order at the origin");
  hybrid->add_option("--quadrants", quadrants, "adjacent quadrants, e.g. 1234 or 12");
  hybrid->add_option("--fiber-coeff", fiber);
  hybrid->add_option("--lo", grid.lo);
  hybrid->add_option("--hi", grid.hi);
  hybrid->add_option("--h", grid.h);

  MeshArgs ma;
  auto* mesh = app.add_subcommand("mesh", "OBJ mesh (n = 2) or profile CSV");
  co.add(mesh);
  mesh->add_option("--target", ma.target)
      ->check(CLI::IsMember({"bowl", "trajectory", "timelike", "spindle", "hybrid"}));
  mesh->add_option("--angular", ma.angular);
  mesh->add_option("--profile-samples", ma.profile_samples);
  mesh->add_option("--s-lo", ma.s_lo);
  mesh->add_option("--s-hi", ma.s_hi);
  mesh->add_option("--quadrant", ma.quadrant);
  mesh->add_option("--theta-max", ma.theta_max);
  mesh->add_option("--s0", ma.s0);
  mesh->add_option("--w0", ma.w0);
  mesh->add_option("--family", ma.family);
  mesh->add_option("--lo", ma.lo);
  mesh->add_option("--hi", ma.hi);
  mesh->add_option("--count", ma.count);
  mesh->add_option("--quadrants", ma.quadrants);
  mesh->add_option("--order", ma.order);

  VerifyArgs va;
  auto* verify = app.add_subcommand("verify", "PDE residual and smoothness checks");
  co.add(verify);
  verify->add_option("target", va.target)->required()->check(CLI::IsMember({"bowl", "hybrid", "const"}));
  verify->add_option("--h", va.hs, "three spacings, comma separated");
  verify->add_option("--L", va.L, "half width of the bowl box");
  verify->add_option("--order", va.order, "highest derivative order for the jump scan");
  verify->add_option("--quadrants", va.quadrants);
  verify->add_flag("--mismatched", va.mismatched, "glue f1 with -f2 (control)");
  verify->add_option("--taylor", va.taylor);

  try {
    auto args = expand_config(argc, argv);
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  } catch (const ConfigError& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 2;
  }
  if (verify->parsed() && va.target == "bowl" && verify->count("--n") == 0) co.n = 2;

  try {
    if (classify_cmd->parsed()) return cmd_classify(co, s0, w0);
    if (portrait->parsed()) return cmd_portrait(co, pr, wlo->count() + whi->count() > 0);
    if (bowl->parsed()) return cmd_bowl(co, samples, s_hi);
    if (sep->parsed()) return cmd_separatrix(co);
    if (wing->parsed()) return cmd_wing(co, s0, ambient);
    if (spindle->parsed()) return cmd_spindle(co, s0);
    if (hybrid->parsed()) {
      auto hc = hybrid_config(co, order, quadrants, fiber);
      hc.n = hybrid->count("--n") ? co.n : 2;
      return cmd_hybrid(co, hc, grid);
    }
    if (mesh->parsed()) {
      if (mesh->count("--n") == 0) co.n = 2;
      return cmd_mesh(co, ma);
    }
    if (verify->parsed()) return cmd_verify(co, va);
  } catch (const ConfigError& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 2;
  } catch (const DomainError& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 2;
  } catch (const ParameterError& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 2;
  } catch (const SearchFailure& e) {
    fmt::print(stderr, "search failed: {}\n", e.what());
    return 1;
  } catch (const DegeneracyError& e) {
    fmt::print(stderr, "degenerate: {}\n", e.what());
    return 1;
  } catch (const PrecisionError& e) {
    fmt::print(stderr, "precision: {}\n", e.what());
    return 1;
  }
  return 0;
}
