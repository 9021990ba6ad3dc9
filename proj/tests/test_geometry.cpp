#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "oracle/taylor_oracle.hpp"
#include "soliton/classifier.hpp"
#include "soliton/errors.hpp"
#include "soliton/geometry.hpp"
#include "soliton/verifier.hpp"

using namespace soliton;

TEST_CASE("graph of a barrier trajectory") {
  const auto t = integrate_both(FlowParams::rotational_minkowski(3), {1.0, 1.0});
  const auto g = build_graph(t, 0.0);
  for (const auto& s : g.samples) CHECK(s.v == doctest::Approx(s.x - 1.0).epsilon(1e-12));
  CHECK(residual_keyODE(g) == 0.0);
}

TEST_CASE("bowl graph near the axis") {
  for (int n : {2, 3}) {
    const auto p = FlowParams::rotational_minkowski(n);
    const auto b = compute_bowl(p);
    const GraphFunction g(b.series, b.s_join, b.trajectory);
    CHECK(g.f(0.0) == 0.0);
    CHECK(g.df(0.0) == 0.0);
    const double s = 0.01;
    CHECK(g.f(s) == doctest::Approx(s * s / (2.0 * n)).epsilon(1e-4));
    CHECK(g.df(2.0) == doctest::Approx(b.w(2.0)).epsilon(1e-12));
    // continuity across the series join
    const double j = b.s_join;
    CHECK(std::abs(g.f(j * (1 - 1e-9)) - g.f(j * (1 + 1e-9))) < 1e-15);
  }
  const auto p3 = FlowParams::rotational_minkowski(3);
  const auto b3 = compute_bowl(p3);
  CHECK(residual_keyODE(build_graph(b3.trajectory, 0.0)) <= 1e-8);
}

TEST_CASE("below-bowl graph has one interior minimum") {
  const auto c = classify(FlowParams::rotational_minkowski(3), 1.0, 0.0);
  const auto g = build_graph(c.trajectory, 0.0);
  int minima = 0;
  for (std::size_t i = 1; i + 1 < g.samples.size(); ++i)
    if (g.samples[i].v < g.samples[i - 1].v && g.samples[i].v <= g.samples[i + 1].v) ++minima;
  CHECK(minima == 1);
}

TEST_CASE("timelike wing apex and branches") {
  const auto p = FlowParams::rotational_minkowski(3);
  const auto w = build_wing(p, 1.0);
  CHECK(w.alpha.alpha(w.y0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(w.alpha.alpha_second(w.y0) == doctest::Approx(-2.0).epsilon(1e-10));
  double amax = 0.0;
  for (const auto& s : w.curve.samples) amax = std::max(amax, s.v);
  CHECK(amax <= 1.0 + 1e-12);
  CHECK(residual_keyODE(w.f_plus, 1e-3) < 1e-6);
  CHECK(residual_keyODE(w.f_minus, 1e-3) < 1e-6);
  CHECK_THROWS_AS(build_wing(p, 0.0), DomainError);
}

TEST_CASE("euclidean wing apex is a minimum") {
  const auto w = build_wing(FlowParams(3, 1, 1, 1.0), 1.0);
  CHECK(w.alpha.alpha_second(w.y0) == doctest::Approx(1.0).epsilon(1e-10));
  double amin = 10.0;
  for (const auto& s : w.curve.samples) amin = std::min(amin, s.v);
  CHECK(amin >= 1.0 - 1e-12);
}

TEST_CASE("spindle") {
  const auto sp = build_spindle(FlowParams::rotational_minkowski(3), 1.0);
  CHECK(sp.closed);
  CHECK(std::isfinite(sp.wing.y_lo));
  CHECK(std::isfinite(sp.wing.y_hi));
  CHECK(sp.wing.y_lo < 0.0);
  CHECK(sp.wing.y_hi > 0.0);
  CHECK(std::abs(std::abs(sp.slope_lo) - 1.0) < 1e-2);
  CHECK(std::abs(std::abs(sp.slope_hi) - 1.0) < 1e-2);
  CHECK(sp.wing.alpha.alpha(sp.wing.y_lo) == doctest::Approx(1e-4).epsilon(1e-6));
  CHECK(sp.wing.alpha.alpha(sp.wing.y_hi) == doctest::Approx(1e-4).epsilon(1e-6));
  CHECK(sp.y_axis_lo < sp.wing.y_lo);
  CHECK(sp.y_axis_hi > sp.wing.y_hi);
  CHECK_THROWS_AS(build_spindle(FlowParams(3, 1, 1, 1.0), 1.0), ParameterError);
}

TEST_CASE("no tangency principle") {
  const auto r = tangency_check(FlowParams::rotational_minkowski(3), 1.0, 2.0);
  CHECK(r.strictly_below);
  CHECK(r.max_gap < 0.0);
  CHECK(r.samples >= 400);
  CHECK(r.beta_second < r.alpha2_second);
}

TEST_CASE("quadrant masks") {
  CHECK(QuadrantMask::parse("1234").to_string() == "1234");
  CHECK_NOTHROW(QuadrantMask::parse("12").validate());
  CHECK_NOTHROW(QuadrantMask::parse("41").validate());
  CHECK_NOTHROW(QuadrantMask::parse("341").validate());
  CHECK_THROWS_AS(QuadrantMask::parse("13").validate(), ConfigError);
  CHECK_THROWS_AS(QuadrantMask::parse("1").validate(), ConfigError);
  CHECK_THROWS_AS(QuadrantMask::parse("15"), ConfigError);
}

TEST_CASE("hybrid series against the rational oracle") {
  HybridConfig hc;
  const HybridField f(hc);
  const auto q1 = oracle::integrate_series(oracle::odd_series(+1, +1, oracle::Q(1), 11));
  const auto q2 = oracle::integrate_series(oracle::odd_series(-1, +1, oracle::Q(1), 11));
  for (int k = 0; k <= 4; ++k) {
    const auto sgn = (k % 2 == 0) ? oracle::Q(1) : oracle::Q(-1);
    CHECK(q2[2 * k] == sgn * q1[2 * k]);  // exact
    const double e1 = static_cast<double>(q1[2 * k]);
    CHECK(std::abs(f.f1_taylor()[2 * k] - e1) <= 1e-15 * std::abs(e1) + 1e-300);
    CHECK(f.f2_taylor()[2 * k] == doctest::Approx(static_cast<double>(q2[2 * k])).epsilon(1e-15));
  }
  CHECK(f.f1_taylor()[2] == 0.25);
}

TEST_CASE("hybrid field shape") {
  HybridConfig hc;
  const HybridField f(hc);
  CHECK(f.u(0.0, 0.0) == 0.0);
  for (double t : {-1.5, -0.3, 0.7, 1.9}) {
    CHECK(f.u(t, t) == 0.0);
    CHECK(f.u(t, -t) == 0.0);
  }
  const double x = 0.05;
  CHECK(f.u(x, 0.0) == doctest::Approx(x * x / 4).epsilon(1e-3));
  CHECK(f.u(0.0, x) == doctest::Approx(-x * x / 4).epsilon(1e-3));

  HybridConfig half;
  half.mask = QuadrantMask::parse("12");
  const HybridField g(half);
  CHECK(std::isnan(g.u(-1.0, 0.2)));
  CHECK(g.u(1.0, 0.2) == f.u(1.0, 0.2));
  CHECK(g.covers(1.0, 1.0));
  CHECK_FALSE(g.covers(-1.0, -1.0));
  CHECK_FALSE(g.covers(0.0, 0.0));
}

TEST_CASE("boost invariance of the lifted hybrid") {
  HybridConfig hc;
  hc.n = 3;
  const HybridField f(hc);
  std::vector<std::vector<double>> xs;
  std::vector<double> ys;
  for (double a = -1.0; a <= 1.0; a += 0.25)
    for (double b = -1.0; b <= 1.0; b += 0.5) {
      xs.push_back({a, 0.4 * b});
      ys.push_back(0.8 * b - 0.1);
    }
  CHECK(boost_invariance_defect(f, xs, ys, {-1.0, -0.25, 0.5, 1.0}) < 1e-10);
}

TEST_CASE("timelike boost family from the strip") {
  const auto p = FlowParams::boost(3, -1);
  const auto bowl = timelike_family_from_strip(p, SolutionTag::Bowl);
  CHECK(bowl.samples.front().x == 0.0);
  CHECK(bowl.samples.front().dv == 0.0);
  for (const auto& s : bowl.samples) CHECK(s.gap > 0.0);
  CHECK(residual_keyODE(bowl) <= 1e-8);
  for (auto tag : {SolutionTag::BelowBowl, SolutionTag::AboveBowl}) {
    const auto c = timelike_family_from_strip(p, tag);
    bool ok = true;
    for (const auto& s : c.samples) ok = ok && s.gap > 0.0 && std::abs(s.dv) <= 1.0;
    CHECK(ok);
    CHECK(residual_keyODE(c) <= 1e-8);
  }
  CHECK_THROWS_AS(timelike_family_from_strip(p, SolutionTag::Separatrix), ParameterError);
}
