#pragma once

// Phase-plane classification of slope solutions for the barrier form
// et * ep = -1 (rotational Minkowski, and the boost timelike cones after
// the substitution q = -f).
//
// Classes are keyed to where the solution sits relative to the two
// distinguished solutions: the bowl w_B (regular at s = 0, w_B(0) = 0) inside
// the strip |w| < 1, and the separatrix above w = 1 that stays asymptotic to
// the critical line w = s / c.

#include <optional>
#include <string_view>
#include <vector>

#include "soliton/ode_engine.hpp"

namespace soliton {

// Constant tags name the caller's w = +1 / -1. The other tags refer to the
// et = +1 picture, which for et = -1 is reached by w -> -w.
enum class SolutionTag {
  ConstantPlus,
  ConstantMinus,
  Bowl,
  BelowBowl,
  AboveBowl,
  GammaMinusBlowup,
  Separatrix,
  GammaPlusGlobal,
  GammaPlusBlowup,
};

std::string_view to_string(SolutionTag t);

struct EndpointLimit {
  enum class Kind { Value, BlowUp, Unbounded };
  Kind kind = Kind::Value;
  double value = 0.0;      // limit of w (Value), s* (BlowUp), w at the horizon (Unbounded)
  double tolerance = 0.0;  // attached uncertainty of `value`
  int sign = 0;            // BlowUp / Unbounded direction
  double s = 0.0;          // where the endpoint was read
};

struct LimitsReport {
  EndpointLimit at_zero;
  EndpointLimit at_infinity;
};

LimitsReport limits_report(const Trajectory& traj);

struct BowlSolution {
  std::vector<double> series;  // odd Taylor coefficients at s = 0
  double s_join = 1e-4;        // series below, integration above
  Trajectory trajectory;

  double w(double s) const;
};

BowlSolution compute_bowl(const FlowParams& params, const IntegratorConfig& cfg = {});

struct SeparatrixOptions {
  double anchor = 0.0;           // 0 selects s0 = c
  double defect_from = 50.0;     // S for the asymptote defect
  double low_offset = 1e-6;      // initial lower bracket w = 1 + low_offset
  int max_bisections = 200;
};

struct SeparatrixResult {
  double anchor = 0.0;
  double value = 0.0;  // midpoint of the final bracket
  double bracket_lo = 0.0;
  double bracket_hi = 0.0;
  int bisections = 0;
  int undecided_shots = 0;
  // Same solution reached by integrating back from the asymptote; the
  // forward-unstable separatrix is backward-attracting.
  double backward_value = 0.0;
  double defect_from = 0.0;
  double asymptote_defect = 0.0;  // sup_{s >= S} |c w(s) - s| over stored samples
  Trajectory trajectory;

  double w(double s) const { return trajectory.w_at(s); }
  double defect_sup(double S) const;
};

SeparatrixResult compute_separatrix(const FlowParams& params, const IntegratorConfig& cfg = {},
                                    double tol = 1e-10, const SeparatrixOptions& opt = {});

struct ClassifierOptions {
  double bowl_tol = 1e-9;
  double separatrix_tol = 1e-8;
  double separatrix_bisection_tol = 1e-10;
};

struct Evidence {
  LimitsReport limits;
  std::vector<double> critical_points;
  std::optional<BlowupInfo> blowup;
  CausalSign causal_sign = CausalSign::Mixed;  // of the graph for the caller's params
  std::optional<double> reference;             // w_B(s0) or separatrix(s0)
  bool monotone = true;                        // no sign change of w' on the samples
};

struct SolutionClass {
  SolutionTag tag = SolutionTag::Bowl;
  Evidence evidence;
  Trajectory trajectory;  // in the et = +1 picture
};

// Holds the shared references; classify() is const and re-entrant.
class Classifier {
 public:
  explicit Classifier(const FlowParams& params, const IntegratorConfig& cfg = {},
                      const ClassifierOptions& opt = {});

  SolutionClass classify(double s0, double w0) const;

  const BowlSolution& bowl() const { return bowl_; }
  const SeparatrixResult& separatrix() const { return separatrix_; }
  const FlowParams& params() const { return params_; }
  // Parameters of the et = +1 picture used for integration.
  const FlowParams& internal_params() const { return internal_; }

 private:
  FlowParams params_;
  FlowParams internal_;
  bool flipped_ = false;
  IntegratorConfig cfg_;
  ClassifierOptions opt_;
  BowlSolution bowl_;
  SeparatrixResult separatrix_;
};

SolutionClass classify(const FlowParams& params, double s0, double w0,
                       const IntegratorConfig& cfg = {});

}  // namespace soliton
