#include "soliton/core.hpp"

#include <cmath>
#include <string>

#include "soliton/errors.hpp"

namespace soliton {

FlowParams::FlowParams(int n_, int eps_prime_, int eps_tilde_, double fiber_coeff_)
    : n(n_), eps_prime(eps_prime_), eps_tilde(eps_tilde_), fiber_coeff(fiber_coeff_) {
  if (n < 2) throw ParameterError("n must be >= 2, got " + std::to_string(n));
  if (eps_prime != 1 && eps_prime != -1) throw ParameterError("eps_prime must be +1 or -1");
  if (eps_tilde != 1 && eps_tilde != -1) throw ParameterError("eps_tilde must be +1 or -1");
  if (!(fiber_coeff > 0.0) || !std::isfinite(fiber_coeff))
    throw ParameterError("fiber coefficient must be positive");
}

FlowParams FlowParams::rotational_minkowski(int n) { return {n, -1, +1, double(n - 1)}; }

FlowParams FlowParams::rotational_euclidean(int n) { return {n, +1, +1, double(n - 1)}; }

FlowParams FlowParams::boost(int n, int eps_tilde, bool strict_unit_coeff) {
  return {n, +1, eps_tilde, strict_unit_coeff ? 1.0 : double(n - 1)};
}

double FlowParams::h(double s) const { return eps_tilde * fiber_coeff / s; }

double FlowParams::h_prime(double s) const { return -eps_tilde * fiber_coeff / (s * s); }

std::string_view to_string(Region r) {
  switch (r) {
    case Region::InnerStrip: return "InnerStrip";
    case Region::GammaPlus: return "GammaPlus";
    case Region::GammaMinus: return "GammaMinus";
    case Region::BarrierPlus: return "BarrierPlus";
    case Region::BarrierMinus: return "BarrierMinus";
  }
  return "?";
}

double rhs(const FlowParams& p, double s, double w) {
  if (!(s > 0.0)) throw DomainError("rhs: s must be positive");
  return (p.eps_tilde + p.eps_prime * w * w) * (1.0 - w * p.h(s));
}

double rhs(const FlowParams& p, PhaseState state) { return rhs(p, state.s, state.w); }

double rhs_wing(const FlowParams& p, double alpha, double alpha_prime) {
  if (!(alpha > 0.0)) throw DomainError("rhs_wing: alpha must be positive");
  return (p.eps_prime + p.eps_tilde * alpha_prime * alpha_prime) * (p.h(alpha) - alpha_prime);
}

Region region_of(PhaseState state) {
  const double w = state.w;
  if (std::abs(w - 1.0) <= kBarrierEquality) return Region::BarrierPlus;
  if (std::abs(w + 1.0) <= kBarrierEquality) return Region::BarrierMinus;
  if (w > 1.0) return Region::GammaPlus;
  if (w < -1.0) return Region::GammaMinus;
  return Region::InnerStrip;
}

double critical_line(const FlowParams& p, double s) {
  return s / (p.eps_tilde * p.fiber_coeff);
}

double critical_concavity(const FlowParams& p, double s1) {
  if (!(s1 > 0.0)) throw DomainError("critical_concavity: s1 must be positive");
  // Along a solution w'' = A'(w) w' B + A(w) (-w' h - w h'); on the critical
  // line B = 1 - w h = 0 and w' = 0, leaving -A(w) w h'.
  const double w = critical_line(p, s1);
  const double a = p.eps_tilde + p.eps_prime * w * w;
  return -a * w * p.h_prime(s1);
}

std::vector<double> reparametrize_unit_gradient(std::span<const double> grid,
                                                std::span<const double> z) {
  if (grid.size() != z.size()) throw ParameterError("grid and z sizes differ");
  if (grid.size() < 2) throw ParameterError("need at least two grid nodes");
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (!(z[i] > 0.0)) throw DomainError("z must be strictly positive on the grid");
    if (i > 0 && !(grid[i] > grid[i - 1])) throw ParameterError("grid must be increasing");
  }
  std::vector<double> v(grid.size(), 0.0);
  for (std::size_t i = 1; i < grid.size(); ++i)
    v[i] = v[i - 1] + 0.5 * (grid[i] - grid[i - 1]) * (1.0 / z[i - 1] + 1.0 / z[i]);
  return v;
}

}  // namespace soliton
