#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "soliton/core.hpp"
#include "soliton/errors.hpp"

using namespace soliton;

TEST_CASE("parameter invariants") {
  CHECK_THROWS_AS(FlowParams(1, -1, 1, 0.0), ParameterError);
  CHECK_THROWS_AS(FlowParams(3, 0, 1, 2.0), ParameterError);
  CHECK_THROWS_AS(FlowParams(3, -1, 2, 2.0), ParameterError);
  const auto p = FlowParams::rotational_minkowski(3);
  CHECK(p.eps_prime == -1);
  CHECK(p.eps_tilde == 1);
  CHECK(p.fiber_coeff == 2.0);
  CHECK(p.has_barriers());
  CHECK_FALSE(FlowParams::rotational_euclidean(3).has_barriers());
  CHECK(FlowParams::boost(4, -1).fiber_coeff == 3.0);
  CHECK(FlowParams::boost(4, -1, true).fiber_coeff == 1.0);
  CHECK(p.h(2.0) == doctest::Approx(1.0));
}

TEST_CASE("reduced right-hand side") {
  const auto p = FlowParams::rotational_minkowski(3);
  CHECK(rhs(p, 1.0, 0.0) == 1.0);
  CHECK(rhs(p, 2.0, 1.0) == 0.0);
  CHECK(rhs(p, 2.0, 2.0) == doctest::Approx(3.0));
  CHECK(rhs(p, 2.0, -1.0) == 0.0);
  CHECK_THROWS_AS(rhs(p, 0.0, 0.5), DomainError);
}

TEST_CASE("wing right-hand side") {
  const auto p = FlowParams::rotational_minkowski(3);
  CHECK(rhs_wing(p, 1.5, 0.0) == doctest::Approx(-2.0 / 1.5));
  CHECK(rhs_wing(FlowParams(3, 1, 1, 1.0), 1.0, 0.0) == doctest::Approx(1.0));
  CHECK(rhs_wing(p, 1.0, 1.0) == 0.0);
}

TEST_CASE("regions") {
  CHECK(region_of({1.0, 0.5}) == Region::InnerStrip);
  CHECK(region_of({1.0, -2.0}) == Region::GammaMinus);
  CHECK(region_of({1.0, 3.0}) == Region::GammaPlus);
  CHECK(region_of({1.0, 1.0}) == Region::BarrierPlus);
  CHECK(region_of({1.0, -1.0}) == Region::BarrierMinus);
}

TEST_CASE("critical line and concavity") {
  const auto p = FlowParams::rotational_minkowski(3);
  CHECK(critical_line(p, 4.0) == doctest::Approx(2.0));
  CHECK(critical_line(FlowParams(2, -1, 1, 1.0), 1.0) == doctest::Approx(1.0));
  CHECK(critical_line(p, 0.5) == doctest::Approx(0.25));
  CHECK(critical_concavity(p, 1.0) == doctest::Approx(0.75));
  CHECK(critical_concavity(p, 4.0) == doctest::Approx(-0.75));
  CHECK(critical_concavity(p, 2.0) == doctest::Approx(0.0));  // w = 1 on the barrier
  CHECK(critical_concavity(p, 2.0) == 0.0);
}

TEST_CASE("unit-gradient reparametrization") {
  std::vector<double> s, one, two;
  for (int i = 0; i <= 100; ++i) {
    s.push_back(i / 100.0);
    one.push_back(1.0);
    two.push_back(2.0);
  }
  auto v = reparametrize_unit_gradient(s, one);
  for (std::size_t i = 0; i < s.size(); ++i) CHECK(v[i] == doctest::Approx(s[i]).epsilon(1e-14));
  CHECK(reparametrize_unit_gradient(s, two).back() == doctest::Approx(0.5));

  std::vector<double> g, z;
  const int N = 4000;
  for (int i = 0; i <= N; ++i) {
    const double x = 1.0 + (std::numbers::e - 1.0) * i / N;
    g.push_back(x);
    z.push_back(x);
  }
  // v' = 1/s gives ln s; trapezoid error is O(h^2)
  CHECK(std::abs(reparametrize_unit_gradient(g, z).back() - 1.0) < 1e-7);
}
