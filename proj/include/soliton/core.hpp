#pragma once

// Shared domain types and the reduced right-hand sides
//
//   w'      = (et + ep w^2) (1 - w h(s))          slope form, w = f'
//   alpha'' = (ep + et alpha'^2) (h(alpha) - alpha')   inverse (wing) form
//
// with h(s) = et * c / s, et = eps_tilde (base metric sign), ep = eps_prime
// (sign of the vertical factor dt^2) and c the fiber coefficient.

#include <span>
#include <string_view>
#include <vector>

namespace soliton {

struct FlowParams {
  int n = 3;
  int eps_prime = -1;
  int eps_tilde = +1;
  double fiber_coeff = 2.0;

  // Validates the invariants; throws ParameterError.
  FlowParams(int n, int eps_prime, int eps_tilde, double fiber_coeff);
  FlowParams() = default;

  // SO(n) acting on L^{n+1}: Riemannian base, Lorentzian product, c = n - 1.
  static FlowParams rotational_minkowski(int n);
  // SO(n) acting on R^{n+1}: the classical Euclidean translator ODE.
  static FlowParams rotational_euclidean(int n);
  // Boost action on L^n x R (eps' = +1). eps_tilde = +1 in the spacelike
  // region S, -1 in the timelike cones. `strict_unit_coeff` forces c = 1.
  static FlowParams boost(int n, int eps_tilde, bool strict_unit_coeff = false);

  double h(double s) const;
  // dh/ds
  double h_prime(double s) const;
  // True when w = +-1 are constant solutions (eps_tilde * eps_prime = -1).
  bool has_barriers() const { return eps_tilde * eps_prime == -1; }

  friend bool operator==(const FlowParams&, const FlowParams&) = default;
};

struct PhaseState {
  double s = 1.0;
  double w = 0.0;
};

enum class Region { InnerStrip, GammaPlus, GammaMinus, BarrierPlus, BarrierMinus };

std::string_view to_string(Region r);

// |w| within this distance of 1 is a barrier state.
inline constexpr double kBarrierEquality = 1e-12;

double rhs(const FlowParams& p, PhaseState state);
double rhs(const FlowParams& p, double s, double w);

// alpha'' for the inverse (wing) parametrization s = alpha(y).
double rhs_wing(const FlowParams& p, double alpha, double alpha_prime);

Region region_of(PhaseState state);

// The w at which the factor (1 - w h(s)) vanishes: w = s / (eps_tilde c).
double critical_line(const FlowParams& p, double s);

// w'' at a critical point s1 lying on the critical line.
double critical_concavity(const FlowParams& p, double s1);

// Tabulated v with v' = 1/z (cumulative trapezoid, v(grid[0]) = 0).
std::vector<double> reparametrize_unit_gradient(std::span<const double> grid,
                                                std::span<const double> z);

}  // namespace soliton
