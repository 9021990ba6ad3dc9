#include "soliton/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "soliton/dopri5.hpp"
#include "soliton/errors.hpp"

namespace soliton {

namespace {

void require_barrier_form(const FlowParams& p, const char* what) {
  if (p.eps_tilde != 1 || p.eps_prime != -1)
    throw ParameterError(std::string(what) + " needs eps_tilde = +1, eps_prime = -1");
}

EndpointLimit read_end(const Trajectory& traj, const Termination& term, bool left,
                       const IntegratorConfig& cfg) {
  EndpointLimit out;
  out.s = term.s;
  switch (term.kind) {
    case TerminationKind::BlowUp:
      out.kind = EndpointLimit::Kind::BlowUp;
      out.value = term.s;
      out.sign = term.sign;
      out.tolerance = std::max(term.last_gap, cfg.rel_tol * term.s);
      return out;
    case TerminationKind::NotIntegrated:
      out.value = left ? traj.samples.front().w : traj.samples.back().w;
      out.s = left ? traj.s_lo() : traj.s_hi();
      out.tolerance = std::numeric_limits<double>::infinity();
      return out;
    default: break;
  }
  const double s_end = left ? traj.s_lo() : traj.s_hi();
  const double w_end = left ? traj.samples.front().w : traj.samples.back().w;
  out.s = s_end;
  out.value = w_end;
  const double slope = left ? traj.samples.front().slope : traj.samples.back().slope;
  if (!left && std::abs(w_end) > 2.0 && w_end * slope > 0.0) {
    out.kind = EndpointLimit::Kind::Unbounded;
    out.sign = w_end > 0 ? 1 : -1;
    return out;
  }
  // Remaining drift estimated from one decade (left) / one halving (right) back.
  double probe = left ? s_end * 10.0 : s_end * 0.5;
  double drift = 0.0;
  if (!traj.segments.empty() && probe >= traj.dense_lo() && probe <= traj.dense_hi())
    drift = std::abs(traj.w_at(probe) - w_end);
  out.tolerance = drift + 10.0 * cfg.rel_tol * std::max(1.0, std::abs(w_end));
  return out;
}

enum class Shot { Global, BlowUp, Undecided };

Shot shoot(const FlowParams& p, double anchor, double w0, const IntegratorConfig& cfg) {
  const auto r = integrate(p, {anchor, w0}, Direction::TowardInfinity, cfg);
  const auto& t = r.trajectory;
  if (t.right.kind == TerminationKind::BlowUp) return Shot::BlowUp;
  if (!t.critical_points().empty()) return Shot::Global;
  const auto& last = t.samples.back();
  if (last.w < critical_line(p, last.s)) return Shot::Global;
  return Shot::Undecided;
}

// w at `anchor` on the solution that blows up exactly at s_blow (s_blow > anchor).
double blowup_seeded_value(const FlowParams& p, double anchor, double s_blow,
                           const IntegratorConfig& cfg) {
  const double et = p.eps_tilde, ep = p.eps_prime;
  auto g = [&](double u, const ode::Vec<1>& y) -> ode::Vec<1> {
    return {-u / ((et * u * u + ep) * (u - p.h(y[0])))};
  };
  auto valid = [](const ode::Vec<1>& y) { return y[0] > 0.0; };
  ode::StepControl ctl{.rel_tol = cfg.rel_tol, .abs_tol = cfg.abs_tol * 1e-2, .max_step = 1.0,
                       .min_step = 1e-300};
  auto stepper = ode::make_dopri5<1>(g, valid, ctl);
  const double u_end = 1.0 / cfg.tail_switch;
  stepper.reset(0.0, {s_blow}, u_end);
  while (stepper.x() != u_end)
    if (stepper.step(u_end) != ode::StepStatus::Accepted)
      throw SearchFailure("separatrix: blow-up seeded run collapsed");
  const double s_seed = stepper.y()[0];
  if (!(s_seed > anchor)) throw SearchFailure("separatrix: blow-up seed passed the anchor");
  IntegratorConfig back = cfg;
  back.s_min_eps = anchor;
  back.log_substitution = false;
  const auto r = integrate(p, {s_seed, 1.0 / u_end}, Direction::TowardZero, back);
  if (r.trajectory.left.kind != TerminationKind::DomainBoundaryZero)
    throw SearchFailure("separatrix: blow-up seeded run did not reach the anchor");
  return r.trajectory.left.w;
}

bool has_sign_change(const Trajectory& t) {
  int seen = 0;
  for (const auto& smp : t.samples) {
    const int sg = smp.slope > 0 ? 1 : (smp.slope < 0 ? -1 : 0);
    if (sg == 0) continue;
    if (seen == 0) seen = sg;
    if (sg != seen) return true;
  }
  return false;
}

}  // namespace

std::string_view to_string(SolutionTag t) {
  switch (t) {
    case SolutionTag::ConstantPlus: return "ConstantPlus";
    case SolutionTag::ConstantMinus: return "ConstantMinus";
    case SolutionTag::Bowl: return "Bowl";
    case SolutionTag::BelowBowl: return "BelowBowl";
    case SolutionTag::AboveBowl: return "AboveBowl";
    case SolutionTag::GammaMinusBlowup: return "GammaMinusBlowup";
    case SolutionTag::Separatrix: return "Separatrix";
    case SolutionTag::GammaPlusGlobal: return "GammaPlusGlobal";
    case SolutionTag::GammaPlusBlowup: return "GammaPlusBlowup";
  }
  return "?";
}

LimitsReport limits_report(const Trajectory& traj) {
  IntegratorConfig cfg;
  return {read_end(traj, traj.left, true, cfg), read_end(traj, traj.right, false, cfg)};
}

double BowlSolution::w(double s) const {
  if (s < 0.0) throw DomainError("bowl: s must be >= 0");
  if (s <= s_join) return eval_series(series, s);
  return trajectory.w_at(s);
}

BowlSolution compute_bowl(const FlowParams& params, const IntegratorConfig& cfg) {
  require_barrier_form(params, "compute_bowl");
  BowlSolution out;
  out.s_join = 1e-4;
  // Smallest odd order whose first omitted term is below 1e-17 at s_join.
  int order = 1;
  for (;; order += 2) {
    try {
      bowl_start(params, out.s_join, order, 1e-17);
      break;
    } catch (const PrecisionError&) {
      if (order > 41) throw;
    }
  }
  out.series = bowl_series_coeffs(params, order);
  const PhaseState start{out.s_join, eval_series(out.series, out.s_join)};
  out.trajectory = integrate(params, start, Direction::TowardInfinity, cfg).trajectory;
  out.trajectory.left = {TerminationKind::DomainBoundaryZero, 0.0, 0.0};
  return out;
}

double SeparatrixResult::defect_sup(double S) const {
  const double c = trajectory.params.fiber_coeff;
  double sup = 0.0;
  for (const auto& smp : trajectory.samples)
    if (smp.s >= S) sup = std::max(sup, std::abs(c * smp.w - smp.s));
  return sup;
}

SeparatrixResult compute_separatrix(const FlowParams& params, const IntegratorConfig& cfg,
                                    double tol, const SeparatrixOptions& opt) {
  require_barrier_form(params, "compute_separatrix");
  if (!(tol > 0.0)) throw ParameterError("separatrix tolerance must be positive");
  cfg.validate();
  SeparatrixResult out;
  const double c = params.fiber_coeff;
  out.anchor = opt.anchor > 0.0 ? opt.anchor : c;
  // The anchor value must start inside Gamma+.
  double lo = std::max(1.0, critical_line(params, out.anchor)) + opt.low_offset;
  if (shoot(params, out.anchor, lo, cfg) != Shot::Global)
    throw SearchFailure("separatrix: lower bracket w = " + std::to_string(lo) +
                        " does not yield a global solution");
  double hi = blowup_seeded_value(params, out.anchor, out.anchor + 1.0, cfg);
  if (shoot(params, out.anchor, hi, cfg) != Shot::BlowUp)
    throw SearchFailure("separatrix: upper bracket w = " + std::to_string(hi) +
                        " does not blow up before s_max");
  if (!(hi > lo)) throw SearchFailure("separatrix: empty bracket");

  while (hi - lo >= tol) {
    if (out.bisections >= opt.max_bisections)
      throw SearchFailure("separatrix: bisection budget exhausted at width " +
                          std::to_string(hi - lo));
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;  // bracket at double resolution
    ++out.bisections;
    switch (shoot(params, out.anchor, mid, cfg)) {
      case Shot::Global: lo = mid; break;
      case Shot::BlowUp: hi = mid; break;
      case Shot::Undecided:
        ++out.undecided_shots;
        hi = mid;
        break;
    }
  }
  out.bracket_lo = lo;
  out.bracket_hi = hi;
  out.value = 0.5 * (lo + hi);

  // Backward sweep from the asymptote c w - s ~ c / s.
  const double far = cfg.s_max;
  const PhaseState seed{far, far / c + 1.0 / far};
  IntegratorConfig sweep = cfg;
  out.trajectory = integrate(params, seed, Direction::TowardZero, sweep).trajectory;
  out.trajectory.right = {TerminationKind::ReachedSMax, far, seed.w};
  out.backward_value = out.trajectory.w_at(out.anchor);
  out.defect_from = std::min(opt.defect_from, 0.5 * far);
  out.asymptote_defect = out.defect_sup(out.defect_from);
  return out;
}

Classifier::Classifier(const FlowParams& params, const IntegratorConfig& cfg,
                       const ClassifierOptions& opt)
    : params_(params), cfg_(cfg), opt_(opt) {
  if (!params.has_barriers())
    throw ParameterError("classification needs eps_tilde * eps_prime = -1");
  flipped_ = params.eps_tilde == -1;
  internal_ = FlowParams(params.n, -1, +1, params.fiber_coeff);
  bowl_ = compute_bowl(internal_, cfg_);
  separatrix_ = compute_separatrix(internal_, cfg_, opt_.separatrix_bisection_tol);
}

SolutionClass Classifier::classify(double s0, double w0) const {
  if (!(s0 > 0.0)) throw DomainError("s0 must be positive");
  if (!std::isfinite(w0)) throw DomainError("w0 must be finite");
  SolutionClass out;
  const double wq = flipped_ ? -w0 : w0;
  out.trajectory = integrate_both(internal_, {s0, wq}, cfg_);
  const Trajectory& t = out.trajectory;

  auto& ev = out.evidence;
  ev.limits = limits_report(t);
  ev.critical_points = t.critical_points();
  ev.blowup = detect_blowup(t);
  const CausalSign cs = t.causal_sign();
  ev.causal_sign = flipped_ && cs != CausalSign::Mixed
                       ? (cs == CausalSign::Timelike ? CausalSign::Spacelike : CausalSign::Timelike)
                       : cs;
  ev.monotone = !has_sign_change(t);

  switch (region_of({s0, w0})) {
    case Region::BarrierPlus: out.tag = SolutionTag::ConstantPlus; return out;
    case Region::BarrierMinus: out.tag = SolutionTag::ConstantMinus; return out;
    default: break;
  }
  switch (region_of({s0, wq})) {
    case Region::InnerStrip: {
      const double ref = bowl_.w(std::min(s0, bowl_.trajectory.dense_hi()));
      ev.reference = ref;
      const double d = wq - ref;
      if (std::abs(d) <= opt_.bowl_tol)
        out.tag = SolutionTag::Bowl;
      else
        out.tag = d < 0.0 ? SolutionTag::BelowBowl : SolutionTag::AboveBowl;
      return out;
    }
    case Region::GammaMinus: out.tag = SolutionTag::GammaMinusBlowup; return out;
    case Region::GammaPlus: {
      const auto& sep = separatrix_.trajectory;
      if (!sep.segments.empty() && s0 >= sep.dense_lo() && s0 <= sep.dense_hi())
        ev.reference = sep.w_at(s0);
      if (ev.reference && std::abs(wq - *ev.reference) <= opt_.separatrix_tol) {
        // Forward integration leaves the separatrix at an exponential rate;
        // report the backward-swept reference, which is the same solution.
        out.tag = SolutionTag::Separatrix;
        out.trajectory = separatrix_.trajectory;
        ev.limits = limits_report(out.trajectory);
        ev.critical_points = out.trajectory.critical_points();
        ev.blowup.reset();
        ev.monotone = !has_sign_change(out.trajectory);
      } else if (t.right.kind == TerminationKind::BlowUp) {
        out.tag = SolutionTag::GammaPlusBlowup;
      } else if (!ev.critical_points.empty() ||
                 t.samples.back().w < critical_line(internal_, t.samples.back().s)) {
        out.tag = SolutionTag::GammaPlusGlobal;
      } else if (ev.reference) {
        out.tag = wq > *ev.reference ? SolutionTag::GammaPlusBlowup : SolutionTag::GammaPlusGlobal;
      } else {
        out.tag = SolutionTag::Separatrix;
      }
      return out;
    }
    default: break;
  }
  return out;
}

SolutionClass classify(const FlowParams& params, double s0, double w0, const IntegratorConfig& cfg) {
  if (!(s0 > 0.0)) throw DomainError("s0 must be positive");
  return Classifier(params, cfg).classify(s0, w0);
}

}  // namespace soliton
