#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "oracle/taylor_oracle.hpp"
#include "soliton/dopri5.hpp"
#include "soliton/errors.hpp"
#include "soliton/ode_engine.hpp"

using namespace soliton;

TEST_CASE("dopri5 on y' = y and its dense output") {
  auto f = [](double, const ode::Vec<1>& y) { return ode::Vec<1>{y[0]}; };
  auto ok = [](const ode::Vec<1>&) { return true; };
  ode::StepControl ctl;
  ctl.rel_tol = 1e-12;
  ctl.abs_tol = 1e-14;
  auto st = ode::make_dopri5<1>(f, ok, ctl);
  st.reset(0.0, {1.0}, 2.0);
  double worst_dense = 0.0;
  while (st.x() < 2.0) {
    REQUIRE(st.step(2.0) == ode::StepStatus::Accepted);
    const auto& d = st.last_dense();
    const double mid = d.x0 + 0.5 * d.h;
    worst_dense = std::max(worst_dense, std::abs(d.value(mid)[0] - std::exp(mid)) / std::exp(mid));
  }
  CHECK(st.x() == 2.0);
  CHECK(std::abs(st.y()[0] - std::exp(2.0)) < 1e-10 * std::exp(2.0));
  CHECK(worst_dense < 1e-9);
}

TEST_CASE("dopri5 integrates backwards") {
  auto f = [](double, const ode::Vec<2>& y) { return ode::Vec<2>{y[1], -y[0]}; };
  auto ok = [](const ode::Vec<2>&) { return true; };
  auto st = ode::make_dopri5<2>(f, ok, ode::StepControl{});
  st.reset(0.0, {0.0, 1.0}, -3.0);
  while (st.x() > -3.0) REQUIRE(st.step(-3.0) == ode::StepStatus::Accepted);
  CHECK(std::abs(st.y()[0] - std::sin(-3.0)) < 1e-8);
}

TEST_CASE("integrator settings are validated") {
  IntegratorConfig c;
  c.rel_tol = 0.0;
  CHECK_THROWS_AS(c.validate(), ParameterError);
  c = {};
  c.s_min_eps = 200.0;
  CHECK_THROWS_AS(c.validate(), ParameterError);
  const auto p = FlowParams::rotational_minkowski(3);
  CHECK_THROWS_AS(integrate_both(p, {0.0, 0.0}), DomainError);
  CHECK_THROWS_AS(integrate_both(p, {-1.0, 0.0}), DomainError);
}

TEST_CASE("barrier start gives the constant solution") {
  const auto p = FlowParams::rotational_minkowski(3);
  const auto t = integrate_both(p, {1.0, 1.0});
  CHECK(t.is_constant());
  CHECK(t.right.kind == TerminationKind::ReachedSMax);
  CHECK(t.s_hi() == doctest::Approx(100.0));
  for (const auto& s : t.samples) CHECK(s.w == 1.0);
  CHECK_FALSE(detect_blowup(t).has_value());
}

TEST_CASE("gamma-minus blow-up and its comparison bound") {
  const auto p = FlowParams::rotational_minkowski(3);
  const auto fwd = integrate(p, {1.0, -2.0}, Direction::TowardInfinity);
  REQUIRE(fwd.trajectory.right.kind == TerminationKind::BlowUp);
  CHECK(fwd.trajectory.right.sign == -1);
  const double s_star = fwd.trajectory.right.s;
  // coth comparison: z(s) = coth(s + rho) through (1, -2) explodes at s = 1 + atanh(1/2)
  const double bound = 1.0 + 0.5 * std::log(3.0);
  CHECK(s_star > 1.0);
  CHECK(s_star < bound);
  const auto b = detect_blowup(fwd.trajectory);
  REQUIRE(b.has_value());
  REQUIRE(b->comparison_bound.has_value());
  CHECK(*b->comparison_bound == doctest::Approx(bound).epsilon(1e-9));

  const auto back = integrate(p, {1.0, -2.0}, Direction::TowardZero);
  CHECK(back.trajectory.left.kind == TerminationKind::DomainBoundaryZero);
  CHECK(std::abs(back.trajectory.left.w + 1.0) < 1e-3);
}

TEST_CASE("gamma-plus blow-up from (2, 1000)") {
  const auto t = integrate_both(FlowParams::rotational_minkowski(3), {2.0, 1000.0});
  const auto b = detect_blowup(t);
  REQUIRE(b.has_value());
  CHECK(std::isfinite(b->s_star));
  CHECK(b->s_star > 2.0);
  CHECK(b->sign == 1);
}

TEST_CASE("bowl series against the rational oracle") {
  for (int n : {2, 3, 4, 5, 7}) {
    const auto p = FlowParams::rotational_minkowski(n);
    const auto a = bowl_series_coeffs(p, 15);
    const auto q = oracle::odd_series(+1, -1, oracle::Q(n - 1), 15);
    CAPTURE(n);
    for (int k = 0; k <= 15; ++k) {
      const double exact = static_cast<double>(q[k]);
      CHECK(std::abs(a[k] - exact) <= 1e-15 * std::max(1.0, std::abs(exact)));
    }
    CHECK(a[2] == 0.0);
    CHECK(q[1] == oracle::Q(1, n));
    CHECK(q[3] == -oracle::Q(1, n * n * n * (n + 2)));
  }
}

TEST_CASE("series start points") {
  const auto p3 = FlowParams::rotational_minkowski(3);
  const auto a = bowl_start(p3, 1e-3, 3);
  CHECK(a.w == doctest::Approx(1e-3 / 3.0 - 1e-9 / 135.0).epsilon(1e-14));
  CHECK(bowl_start(p3, 0.0, 3).w == 0.0);
  // the n = 2 example: first omitted term a3 s^3 ~ 3e-11 sits above the default 1e-12
  const auto p2 = FlowParams::rotational_minkowski(2);
  CHECK_THROWS_AS(bowl_start(p2, 1e-3, 1), PrecisionError);
  CHECK(bowl_start(p2, 1e-3, 1, 1e-10).w == doctest::Approx(5e-4));
}

TEST_CASE("critical points are located on the line r") {
  const auto p = FlowParams::rotational_minkowski(3);
  const auto t = integrate_both(p, {4.0, 2.0});
  const auto cps = t.critical_points();
  REQUIRE(cps.size() == 1);
  CHECK(cps[0] == doctest::Approx(4.0).epsilon(1e-9));
}

TEST_CASE("property: strip trajectories stay in the strip") {
  std::mt19937_64 rng(20240611);
  std::uniform_real_distribution<double> S(0.05, 20.0), W(-0.999, 0.999);
  for (int n : {2, 3, 6}) {
    const auto p = FlowParams::rotational_minkowski(n);
    for (int i = 0; i < 25; ++i) {
      const double s0 = S(rng), w0 = W(rng);
      CAPTURE(n);
      CAPTURE(s0);
      CAPTURE(w0);
      const auto t = integrate_both(p, {s0, w0});
      CHECK(t.left.kind == TerminationKind::DomainBoundaryZero);
      CHECK(t.right.kind == TerminationKind::ReachedSMax);
      bool inside = true;
      for (const auto& smp : t.samples) inside = inside && std::abs(smp.w) <= 1.0 && smp.barrier_gap > 0.0;
      CHECK(inside);
    }
  }
}

TEST_CASE("property: dense output agrees with the right-hand side") {
  const auto p = FlowParams::rotational_minkowski(3);
  const auto t = integrate_both(p, {1.0, 0.3});
  double worst = 0.0;
  for (const auto& g : t.segments) {
    const double s = 0.5 * (g.s_lo + g.s_hi);
    if (s < 1e-3 || s > 50.0) continue;
    worst = std::max(worst, std::abs(g.slope(s) - rhs(p, s, g.w(s))));
  }
  CHECK(worst < 1e-6);
}
