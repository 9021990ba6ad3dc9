#pragma once

// Adaptive integration of the slope equation w' = (et + ep w^2)(1 - w h(s)).
//
// When w = +-1 are invariant (et * ep = -1) the state is carried in a
// barrier-resolving chart: xi = atanh(w) inside the strip, xi = acoth(w)
// outside it. In that chart xi' = et (1 - w h(s)), which is regular up to the
// barriers, so trajectories keep their distance to w = +-1 even after it
// drops below double resolution of w itself. Integration toward s = 0 runs in
// t = ln s. Near a blow-up the roles are swapped and s is integrated as a
// function of u = 1/w down to u = 0, which locates s* without resolving the
// singularity in s.

#include <array>
#include <optional>
#include <string_view>
#include <vector>

#include "soliton/core.hpp"

namespace soliton {

struct IntegratorConfig {
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  double max_step = 0.5;
  double min_step = 1e-14;
  double escape_threshold = 1e8;
  double s_max = 100.0;
  double s_min_eps = 1e-10;
  // |w| at which a growing solution hands over to the reciprocal chart.
  double tail_switch = 1e3;
  // Integrate toward zero in t = ln s (otherwise raw s).
  bool log_substitution = true;

  void validate() const;
};

enum class Direction { TowardZero, TowardInfinity };

enum class EventKind { CrossedLineR, TouchedBarrier, StepCollapse };

struct EventRecord {
  EventKind kind;
  double s;
  double w;
};

enum class TerminationKind {
  NotIntegrated,       // side not integrated (start point)
  BlowUp,              // |w| -> infinity at finite s*
  DomainBoundaryZero,  // reached s_min_eps; w is the reported limit
  ReachedSMax,
  BarrierContact,
  StepCollapse,
};

struct Termination {
  TerminationKind kind = TerminationKind::NotIntegrated;
  double s = 0.0;        // s where integration stopped (s* for BlowUp)
  double w = 0.0;        // last w (limit value at DomainBoundaryZero)
  int sign = 0;          // BlowUp: sign of w
  double last_gap = 0.0; // BlowUp: |s* - s| of the last stored sample
};

enum class Chart { Raw, Strip, GammaPlus, GammaMinus };
enum class Axis { Linear, Log };

// Piece of dense output on one accepted step, in the chart and axis that
// were used for that step.
struct DenseSegment {
  Chart chart = Chart::Raw;
  Axis axis = Axis::Linear;
  double x0 = 0.0;
  double h = 0.0;
  std::array<double, 5> rc{};
  double s_lo = 0.0;
  double s_hi = 0.0;

  double w(double s) const;
  // dw/ds from differentiating the dense polynomial
  double slope(double s) const;
  // distance | |w| - 1 | computed in the chart
  double barrier_gap(double s) const;
};

struct TrajectorySample {
  double s = 0.0;
  double w = 0.0;
  double slope = 0.0;        // w' from the right-hand side
  double barrier_gap = 0.0;  // | |w| - 1 |, resolved in the chart
  Region region = Region::InnerStrip;
};

enum class CausalSign { Timelike = +1, Spacelike = -1, Mixed = 0 };

std::string_view to_string(TerminationKind k);
std::string_view to_string(EventKind k);
std::string_view to_string(CausalSign c);

class Trajectory {
 public:
  FlowParams params;
  PhaseState start;
  std::vector<TrajectorySample> samples;  // strictly increasing in s
  std::vector<DenseSegment> segments;     // increasing in s, no tail segments
  Termination left;
  Termination right;
  std::vector<EventRecord> events;

  bool is_constant() const { return constant_; }
  void mark_constant() { constant_ = true; }

  double s_lo() const { return samples.front().s; }
  double s_hi() const { return samples.back().s; }
  // Span covered by dense output.
  double dense_lo() const;
  double dense_hi() const;

  double w_at(double s) const;
  double slope_at(double s) const;
  double gap_at(double s) const;
  const DenseSegment& segment_at(double s) const;

  // sign(ep + et w^2) over all samples
  CausalSign causal_sign() const;
  // s of CrossedLineR events (critical points of w)
  std::vector<double> critical_points() const;

 private:
  bool constant_ = false;
};

struct IntegrationResult {
  Trajectory trajectory;
  std::vector<EventRecord> events;
};

IntegrationResult integrate(const FlowParams& params, PhaseState init, Direction dir,
                            const IntegratorConfig& cfg = {});

// Both directions from `init`, merged into one trajectory.
Trajectory integrate_both(const FlowParams& params, PhaseState init,
                          const IntegratorConfig& cfg = {});

// Odd Taylor coefficients of the solution regular at s = 0 with w(0) = 0:
// returns a[0..order] with a[k] the coefficient of s^k (even ones are 0).
std::vector<double> bowl_series_coeffs(const FlowParams& params, int order);

double eval_series(const std::vector<double>& coeffs, double s);

// Series start point. Throws PrecisionError when the first omitted term
// exceeds `tol` at s_start.
PhaseState bowl_start(const FlowParams& params, double s_start, int order, double tol = 1e-12);

struct BlowupInfo {
  double s_star = 0.0;
  int sign = 0;
  Direction side = Direction::TowardInfinity;
  // Upper bound for s* from the comparison equation z' = 1 - z^2 through
  // the start point; only when that comparison applies (w0 < -1, et = 1, ep = -1).
  std::optional<double> comparison_bound;
};

std::optional<BlowupInfo> detect_blowup(const Trajectory& traj);

}  // namespace soliton
