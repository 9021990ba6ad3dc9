#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "soliton/classifier.hpp"
#include "soliton/errors.hpp"
#include "soliton/verifier.hpp"

using namespace soliton;

namespace {

GridField plane(double h, std::vector<int> sig, int ep, double a, double b, double c0) {
  const auto ax = GridAxis::span(-1.0, 1.0, h);
  return GridField::sample({ax, ax}, std::move(sig), ep,
                           [=](std::span<const double> x) { return a * x[0] + b * x[1] + c0; });
}

}  // namespace

TEST_CASE("grid axes") {
  const auto ax = GridAxis::span(-2.0, 2.0, 0.02);
  CHECK(ax.count == 201);
  CHECK(ax.at(0) == -2.0);
  CHECK(ax.at(100) == 0.0);
  CHECK(ax.at(200) == 2.0);
  CHECK(ax.at(150) == -ax.at(50));
  CHECK_THROWS_AS(GridAxis::span(-1.0, 1.0, 0.3), ConfigError);
  CHECK_THROWS_AS(GridAxis::span(1.0, -1.0, 0.1), ConfigError);
}

TEST_CASE("constants are not solitons") {
  const auto g = plane(0.1, {1, 1}, 1, 0.0, 0.0, 3.0);
  const auto r = residual_fund_eq(g);
  CHECK(r.evaluated > 0);
  for (double x : r.residual)
    if (!std::isnan(x)) CHECK(x == -1.0);
  CHECK(r.max_abs == 1.0);
}

TEST_CASE("linear field: residual is -1/W at every h") {
  double res[3];
  const double hs[3] = {0.1, 0.05, 0.025};
  for (int i = 0; i < 3; ++i) {
    const auto r = residual_fund_eq(plane(hs[i], {1, 1}, 1, 0.6, 0.8, 0.0));
    res[i] = r.max_abs;
    CHECK(r.max_abs == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
  }
  const auto o = convergence_order(res[0], res[1], res[2]);
  CHECK(o.defined);
  CHECK(std::abs(o.p) < 1e-6);
}

TEST_CASE("degenerate metric is refused") {
  // ep = -1 with |grad u| = 1: W = 0 everywhere
  CHECK_THROWS_AS(residual_fund_eq(plane(0.1, {1, 1}, -1, 1.0, 0.0, 0.0)), DegeneracyError);
}

TEST_CASE("convergence order bookkeeping") {
  const auto o = convergence_order(4e-4, 1e-4, 2.5e-5);
  CHECK(o.defined);
  CHECK(o.p == doctest::Approx(2.0));
  CHECK(o.p_check == doctest::Approx(2.0));
  CHECK_FALSE(convergence_order(1e-4, 2e-4, 1e-5).defined);
  CHECK_FALSE(convergence_order(0.0, 0.0, 0.0).defined);
}

TEST_CASE("one-sided weights") {
  const auto w = one_sided_weights(1, 3);
  CHECK(w[0] == doctest::Approx(-1.5));
  CHECK(w[1] == doctest::Approx(2.0));
  CHECK(w[2] == doctest::Approx(-0.5));
  const auto w2 = one_sided_weights(2, 3);
  CHECK(w2[0] == doctest::Approx(1.0));
  CHECK(w2[1] == doctest::Approx(-2.0));
  CHECK(w2[2] == doctest::Approx(1.0));
  CHECK(one_sided_weights(0, 1)[0] == 1.0);
  CHECK_THROWS_AS(one_sided_weights(2, 2), ParameterError);
}

TEST_CASE("smoothness scan separates smooth fields from kinks") {
  const auto ax = GridAxis::span(-1.0, 1.0, 0.02);
  const auto smooth = GridField::sample({ax, ax}, {1, -1}, 1, [](std::span<const double> x) {
    return x[0] * x[0] - 0.5 * x[1] * x[1] + x[0] * x[1];
  });
  const auto s = smoothness_scan(smooth, 2, 2);
  REQUIRE(s.used_order == 2);
  CHECK(s.jumps[0].max_jump == 0.0);
  CHECK(s.jumps[1].max_jump < 1e-10);
  CHECK(s.jumps[2].max_jump < 1e-8);

  const auto kink = GridField::sample({ax, ax}, {1, -1}, 1,
                                      [](std::span<const double> x) { return std::abs(x[0] - x[1]); });
  const auto k = smoothness_scan(kink, 1, 2);
  CHECK(k.jumps[1].max_jump == doctest::Approx(2.0 * std::sqrt(2.0)).epsilon(1e-9));
}

TEST_CASE("bowl field converges at second order") {
  const auto p = FlowParams::rotational_minkowski(2);
  const auto b = compute_bowl(p);
  const GraphFunction g(b.series, b.s_join, b.trajectory);
  double r[3];
  const double hs[3] = {0.04, 0.02, 0.01};
  for (int i = 0; i < 3; ++i) r[i] = residual_fund_eq(sample_radial(g, 2, 1.0, hs[i], {1, 1}, -1)).max_abs;
  const auto o = convergence_order(r[0], r[1], r[2]);
  CHECK(o.defined);
  CHECK(o.p >= 1.7);
  CHECK(o.p <= 2.3);
  CHECK(r[2] < 1e-5);
}

TEST_CASE("bowl field in three dimensions") {
  const auto p = FlowParams::rotational_minkowski(3);
  const auto b = compute_bowl(p);
  const GraphFunction g(b.series, b.s_join, b.trajectory);
  const auto r = residual_fund_eq(sample_radial(g, 3, 0.8, 0.05, {1, 1, 1}, -1));
  CHECK(r.eps == -1);
  CHECK(r.max_abs < 1e-3);
}

TEST_CASE("hybrid field passes the residual and the smoothness scan") {
  HybridConfig hc;
  double r[3];
  double j1[3], j2[3], m2[3];
  const double hs[3] = {0.04, 0.02, 0.01};
  for (int i = 0; i < 3; ++i) {
    const GridSpec grid{-2.0, 2.0, hs[i]};
    const auto hb = build_hybrid(hc, grid);
    r[i] = residual_fund_eq(hb.sample).max_abs;
    const auto sm = smoothness_scan(hb.sample, 2, 2);
    REQUIRE(sm.used_order == 2);
    CHECK(sm.jumps[0].max_jump == 0.0);
    j1[i] = sm.jumps[1].max_jump;
    j2[i] = sm.jumps[2].max_jump;
    m2[i] = smoothness_scan(sample_hybrid(hb.field.mismatched(), grid), 2, 2).jumps[2].max_jump;
  }
  const auto o = convergence_order(r[0], r[1], r[2]);
  CHECK(o.p >= 1.7);
  CHECK(o.p <= 2.3);
  for (int i = 0; i < 2; ++i) {
    CHECK(j1[i] / j1[i + 1] > 3.0);
    CHECK(j2[i] / j2[i + 1] > 3.0);
    CHECK(m2[i + 1] > 0.5 * m2[i]);
  }
  CHECK(m2[2] > 0.5);
}
