#pragma once

// Profile curves and invariant hypersurfaces built from slope solutions:
// graphs f = f0 + int w, wings and spindles from the inverse equation for
// s = alpha(y), and the boost-invariant hybrid field glued across the
// lightcone of L^2.

#include <array>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "soliton/classifier.hpp"
#include "soliton/dopri5.hpp"
#include "soliton/ode_engine.hpp"

namespace soliton {

enum class Parametrization { GraphOverS, WingOverY };

// (s, f, f', f'') for graphs, (y, alpha, alpha', alpha'') for wings.
struct ProfileSample {
  double x = 0.0;
  double v = 0.0;
  double dv = 0.0;
  double d2v = 0.0;
  // | |f'| - 1 | from the barrier chart (graphs with et * ep = -1), else NaN.
  double gap = std::numeric_limits<double>::quiet_NaN();
};

struct ProfileCurve {
  Parametrization kind = Parametrization::GraphOverS;
  FlowParams params;
  double x_ref = 0.0;  // f(x_ref) = f0 for graphs; apex y for wings
  double f0 = 0.0;
  std::vector<ProfileSample> samples;  // strictly increasing x
  // Graph: a blow-up cut the requested span short.
  bool truncated = false;
  // Wing ends stopped at the axis (alpha = alpha_stop), lo = smaller y.
  bool lightcone_lo = false;
  bool lightcone_hi = false;
  // Wing branch graphs: (s, f) of the apex they were split from.
  std::optional<std::array<double, 2>> apex;
};

// f on the dense span of a trajectory, optionally continued to s = 0 with
// the odd w-series (then f(0) = 0).
class GraphFunction {
 public:
  GraphFunction() = default;
  GraphFunction(const Trajectory& traj, double s_ref, double f_ref);
  GraphFunction(std::vector<double> w_series, double s_join, const Trajectory& traj);

  double f(double s) const;
  double df(double s) const;
  double d2f(double s) const;
  double s_lo() const;
  double s_hi() const;
  const Trajectory& trajectory() const { return traj_; }

 private:
  double integral_to(double s) const;  // int_{dense_lo}^{s} w

  std::vector<double> series_;  // w coefficients; empty when no series part
  double s_join_ = 0.0;
  double offset_ = 0.0;  // f(dense_lo)
  Trajectory traj_;
  std::vector<double> cumulative_;  // int w up to each segment start
};

// Samples at step ends and step midpoints, f by Gauss-Legendre quadrature.
ProfileCurve build_graph(const Trajectory& traj, double f0);

struct WingConfig {
  // Tight by default: branch graphs divide by alpha'^3 near the apex.
  double rel_tol = 1e-14;
  double abs_tol = 1e-16;
  double max_step = 0.01;
  // Step cap within apex_zone of the apex.
  double apex_zone = 0.02;
  double apex_step = 1e-4;
  double alpha_stop = 1e-4;
  double slope_escape = 1e4;
  double alpha_max = 100.0;
  double y_span = 50.0;
};

enum class WingEnd { LightconeContact, SlopeEscape, AlphaLimit, SpanLimit, StepCollapse };
std::string_view to_string(WingEnd e);

// Dense representation of alpha on [y_lo, y_hi].
class WingFunction {
 public:
  double alpha(double y) const;
  double alpha_prime(double y) const;
  double alpha_second(double y) const;
  double y_lo() const { return steps_.front().x0; }
  double y_hi() const { return steps_.back().x1(); }

 private:
  friend class WingBuilder;
  const ode::DenseStep<2>& step_at(double y) const;
  bool strip_chart_ = false;  // second component is atanh(alpha')
  std::vector<ode::DenseStep<2>> steps_;  // increasing y, positive h
};

struct WingResult {
  ProfileCurve curve;  // wing_over_y
  // Graph branches s -> y of the two monotone arcs: f_plus on y < y0,
  // f_minus on y > y0.
  ProfileCurve f_plus;
  ProfileCurve f_minus;
  WingFunction alpha;
  double y0 = 0.0;
  double y_lo = 0.0;
  double y_hi = 0.0;
  WingEnd end_lo = WingEnd::SpanLimit;
  WingEnd end_hi = WingEnd::SpanLimit;
};

WingResult build_wing(const FlowParams& params, double s0, double y0 = 0.0,
                      const WingConfig& cfg = {});

struct SpindleResult {
  WingResult wing;
  // Linear extrapolation of the end tangents to alpha = 0.
  double y_axis_lo = 0.0;
  double y_axis_hi = 0.0;
  double slope_lo = 0.0;  // alpha' at the stopped ends
  double slope_hi = 0.0;
  bool closed = false;    // both ends reached the axis
};

SpindleResult build_spindle(const FlowParams& params, double s0, const WingConfig& cfg = {});

struct TangencyReport {
  double max_gap = 0.0;      // max over samples of beta - alpha2 (y != y0)
  bool strictly_below = false;
  double beta_second = 0.0;  // beta''(y0) = alpha1''(y0)
  double alpha2_second = 0.0;
  std::size_t samples = 0;
};

// Compares two wings with apexes s1 < s2 at the same y0 after shifting the
// first one onto the second.
TangencyReport tangency_check(const FlowParams& params, double s1, double s2, double radius = 0.2,
                              int samples_per_side = 200, const WingConfig& cfg = {});

// Quadrants Omega_1..Omega_4 of L^2: 1 is x > |y|, then counter-clockwise.
struct QuadrantMask {
  std::array<bool, 4> on{true, true, true, true};
  // Throws ConfigError unless 2, 3 or 4 cyclically adjacent quadrants are set.
  void validate() const;
  static QuadrantMask parse(const std::string& text);  // e.g. "1234", "12", "341"
  std::string to_string() const;
};

struct HybridConfig {
  int n = 2;
  int order = 12;  // Taylor order of f1, f2 at 0
  double fiber_coeff = 1.0;
  QuadrantMask mask;
  double s_max = 4.0;  // largest pseudo-radius the evaluator must cover
  IntegratorConfig integrator;
};

struct GridSpec {
  double lo = -2.0;
  double hi = 2.0;
  double h = 0.02;
};

class GridField;

// u on L^2 assembled from f1 (x^2 > y^2) and f2 (y^2 > x^2), zero on the cone.
class HybridField {
 public:
  explicit HybridField(const HybridConfig& cfg);

  // NaN outside the selected pieces.
  double u(double x, double y) const;
  // u(|x|, y) on R^{n-1} x R.
  double u_tilde(const std::vector<double>& x, double y) const;
  bool covers(double x, double y) const;

  const GraphFunction& f1() const { return f1_; }
  const GraphFunction& f2() const { return f2_; }
  // Taylor coefficients of f1, f2 at 0 (index = power).
  const std::vector<double>& f1_taylor() const { return f1_taylor_; }
  const std::vector<double>& f2_taylor() const { return f2_taylor_; }
  const HybridConfig& config() const { return cfg_; }
  double series_radius() const { return s_join_; }

  // The gluing of f1 with -f2, which is continuous but not C^1 (control case).
  HybridField mismatched() const;

 private:
  HybridConfig cfg_;
  double s_join_ = 0.5;
  double f2_sign_ = 1.0;
  GraphFunction f1_, f2_;
  std::vector<double> f1_taylor_, f2_taylor_;
};

// Sample on a square grid of L^2 (signature (+,-), eps' = +1), padded by two
// stencil layers so residual nodes fill [lo, hi]^2. Nodes outside the
// selected pieces are NaN; the residual mask also covers a tube of
// `cone_tube_cells` cells around the cone.
GridField sample_hybrid(const HybridField& field, const GridSpec& grid, int cone_tube_cells = 3);

// Worst |u~(A_theta p) - u~(p)| over the given points; A_theta boosts the
// (x_1, y) plane.
double boost_invariance_defect(const HybridField& field,
                               const std::vector<std::vector<double>>& xs,
                               const std::vector<double>& ys, const std::vector<double>& thetas);

// Boost-timelike family: strip solution q for et = +1 with the same c,
// returned as f = -q. `which` is Bowl, BelowBowl or AboveBowl; the latter
// two start halfway between the bowl and the barrier at s = 1.
ProfileCurve timelike_family_from_strip(const FlowParams& params, SolutionTag which,
                                        const IntegratorConfig& cfg = {});

}  // namespace soliton
