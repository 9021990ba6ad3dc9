#pragma once

// Independent checks: the divergence-form soliton equation on flat grids,
// the reduced ODE on profile curves, convergence orders, and one-sided
// derivative jumps across lines.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "soliton/geometry.hpp"

namespace soliton {

// Nodes at (first + i) * h, i = 0..count-1, so grids symmetric about 0 are
// exactly symmetric in floating point.
struct GridAxis {
  long first = 0;
  double h = 0.0;
  std::size_t count = 0;

  double at(std::size_t i) const { return static_cast<double>(first + static_cast<long>(i)) * h; }
  // [lo, hi] with lo and hi multiples of h; throws ConfigError otherwise.
  static GridAxis span(double lo, double hi, double h);
};

// Scalar u on a uniform grid of R^n with signature eps_i and vertical sign ep.
class GridField {
 public:
  GridField() = default;
  GridField(std::vector<GridAxis> axes, std::vector<int> signature, int eps_prime);

  static GridField sample(std::vector<GridAxis> axes, std::vector<int> signature, int eps_prime,
                          const std::function<double(std::span<const double>)>& u);

  std::size_t dim() const { return axes_.size(); }
  std::size_t size() const { return values_.size(); }
  const std::vector<GridAxis>& axes() const { return axes_; }
  const std::vector<int>& signature() const { return signature_; }
  int eps_prime() const { return eps_prime_; }
  std::size_t stride(std::size_t axis) const { return strides_[axis]; }

  std::vector<std::size_t> index(std::size_t flat) const;
  std::size_t flat(std::span<const std::size_t> idx) const;
  std::vector<double> coords(std::size_t flat) const;

  std::vector<double>& values() { return values_; }
  const std::vector<double>& values() const { return values_; }
  // 1 = excluded from residual statistics.
  std::vector<std::uint8_t>& mask() { return mask_; }
  const std::vector<std::uint8_t>& mask() const { return mask_; }

  // Exclude nodes whose coordinates satisfy `pred`.
  void mask_where(const std::function<bool(std::span<const double>)>& pred);

 private:
  std::vector<GridAxis> axes_;
  std::vector<int> signature_;
  int eps_prime_ = 1;
  std::vector<std::size_t> strides_;
  std::vector<double> values_;
  std::vector<std::uint8_t> mask_;
};

struct ResidualOptions {
  double w2_threshold = 1e-6;
  unsigned threads = 0;  // 0 = hardware concurrency
};

struct ResidualReport {
  double max_abs = 0.0;
  double mean_abs = 0.0;
  std::size_t evaluated = 0;
  int eps = 0;                    // sign of W^2 enforced on the field
  std::vector<double> residual;   // NaN where not evaluated
};

// R = div(grad u / W) - 1/W with (grad u)_i = eps_i d_i u and
// W^2 = eps (ep + sum eps_i (d_i u)^2), centered differences throughout.
ResidualReport residual_fund_eq(const GridField& field, const ResidualOptions& opt = {});

// max |f'' - (et + ep f'^2)(1 - f' h(s))| over the samples of a graph
// profile. Samples closer than `apex_exclusion` to a recorded apex (in the
// (s, f) plane) are skipped.
double residual_keyODE(const ProfileCurve& profile, double apex_exclusion = 0.0);

struct OrderReport {
  bool defined = false;
  double p = 0.0;        // from the (h, h/2) pair
  double p_check = 0.0;  // from the (h/2, h/4) pair
  std::string note;
};

// Residual magnitudes on three nested grids h, h/2, h/4.
OrderReport convergence_order(double r_h, double r_h2, double r_h4);

struct JumpReport {
  int order = 0;
  double max_jump = 0.0;
  std::size_t points = 0;
};

struct SmoothnessReport {
  std::vector<JumpReport> jumps;  // orders 0..k_used
  int requested_order = 0;
  int used_order = 0;
  std::vector<std::string> warnings;
};

// Two-dimensional fields only: one-sided differences of order 0..max_order
// transverse to the lines x = y and x = -y, compared across each line at
// every grid node on it where both sides are sampled. `accuracy` is the
// truncation order of the one-sided stencils.
SmoothnessReport smoothness_scan(const GridField& field, int max_order, int accuracy = 2,
                                 double exclude_origin = 0.0);

// One-sided weights for the m-th derivative at 0 from samples at 0, 1, ..., N-1
// (unit spacing).
std::vector<double> one_sided_weights(int m, int points);

// Rotationally symmetric u(x) = f(|x|); residual nodes fill [-L, L]^dim.
GridField sample_radial(const GraphFunction& f, int dim, double L, double h,
                        std::vector<int> signature, int eps_prime, int axis_tube_cells = 3);

struct HybridBuild {
  HybridField field;
  GridField sample;
};

HybridBuild build_hybrid(const HybridConfig& cfg, const GridSpec& grid);

}  // namespace soliton
