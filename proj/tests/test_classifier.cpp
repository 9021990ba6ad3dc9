#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "soliton/classifier.hpp"
#include "soliton/errors.hpp"

using namespace soliton;

namespace {

const Classifier& n3() {
  static const Classifier c(FlowParams::rotational_minkowski(3));
  return c;
}

bool increasing(const Trajectory& t) {
  for (std::size_t i = 1; i < t.samples.size(); ++i)
    if (!(t.samples[i].w >= t.samples[i - 1].w)) return false;
  return true;
}

}  // namespace

TEST_CASE("bowl reference") {
  const auto& b = n3().bowl();
  CHECK(b.w(0.0) == 0.0);
  CHECK(b.w(1e-3) == doctest::Approx(3.333e-4).epsilon(1e-3));
  CHECK(std::abs(b.w(50.0) - 1.0) < 0.05);
  CHECK(increasing(b.trajectory));
  CHECK(b.trajectory.critical_points().empty());
  const auto lim = limits_report(b.trajectory);
  CHECK(lim.at_infinity.value == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("below the bowl") {
  const auto c = n3().classify(1.0, 0.0);
  CHECK(c.tag == SolutionTag::BelowBowl);
  CHECK(c.evidence.critical_points.empty());
  CHECK(c.evidence.monotone);
  CHECK(increasing(c.trajectory));
  CHECK(c.evidence.limits.at_zero.value == doctest::Approx(-1.0).epsilon(1e-3));
  CHECK(c.evidence.limits.at_infinity.value == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("above the bowl has one minimum") {
  const auto c = n3().classify(1.0, 0.9);
  CHECK(c.tag == SolutionTag::AboveBowl);
  REQUIRE(c.evidence.critical_points.size() == 1);
  CHECK(critical_concavity(n3().params(), c.evidence.critical_points[0]) > 0.0);
  CHECK(c.evidence.limits.at_zero.value == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(c.evidence.limits.at_infinity.value == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("gamma-minus") {
  const auto c = n3().classify(1.0, -2.0);
  CHECK(c.tag == SolutionTag::GammaMinusBlowup);
  REQUIRE(c.evidence.blowup.has_value());
  CHECK(c.evidence.blowup->s_star > 1.0);
  CHECK(c.evidence.blowup->s_star < 1.5494);
  CHECK(c.evidence.limits.at_zero.value == doctest::Approx(-1.0).epsilon(1e-3));
  CHECK(c.evidence.limits.at_infinity.kind == EndpointLimit::Kind::BlowUp);
}

TEST_CASE("gamma-plus cases") {
  const auto g = n3().classify(4.0, 2.0);
  CHECK(g.tag == SolutionTag::GammaPlusGlobal);
  CHECK(g.evidence.critical_points.size() == 1);
  CHECK(g.evidence.limits.at_zero.value == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(g.evidence.limits.at_infinity.value == doctest::Approx(1.0).epsilon(1e-3));

  const auto b = n3().classify(2.0, 1000.0);
  CHECK(b.tag == SolutionTag::GammaPlusBlowup);
  REQUIRE(b.evidence.blowup.has_value());
  CHECK(b.evidence.blowup->s_star > 2.0);
}

TEST_CASE("constants") {
  CHECK(n3().classify(1.0, 1.0).tag == SolutionTag::ConstantPlus);
  CHECK(n3().classify(3.0, -1.0).tag == SolutionTag::ConstantMinus);
}

TEST_CASE("bad input") {
  CHECK_THROWS_AS(n3().classify(0.0, 0.0), DomainError);
  CHECK_THROWS_AS(n3().classify(1.0, NAN), DomainError);
  CHECK_THROWS_AS(Classifier(FlowParams::rotational_euclidean(3)), ParameterError);
}

TEST_CASE("separatrix") {
  const auto& sp = n3().separatrix();
  CHECK(sp.anchor == 2.0);
  CHECK(sp.bracket_hi - sp.bracket_lo <= 1e-10);
  CHECK(sp.value > 1.0);
  CHECK(std::abs(sp.backward_value - sp.value) < 1e-8);
  CHECK(std::abs(2.0 * sp.w(50.0) - 50.0) < 0.05);
  CHECK(increasing(sp.trajectory));
  CHECK(sp.trajectory.critical_points().empty());

  CHECK(n3().classify(2.0, sp.value - 1e-3).tag == SolutionTag::GammaPlusGlobal);
  CHECK(n3().classify(2.0, sp.value + 1e-3).tag == SolutionTag::GammaPlusBlowup);
  const auto on = n3().classify(2.0, sp.value);
  CHECK(on.tag == SolutionTag::Separatrix);
}

TEST_CASE("timelike boost picture mirrors the strip") {
  const Classifier t(FlowParams::boost(3, -1));
  CHECK(t.internal_params().eps_tilde == 1);
  CHECK(t.classify(1.0, 0.0).tag == SolutionTag::BelowBowl);
  // w -> -w exchanges the two sides of the bowl
  CHECK(t.classify(1.0, -0.9).tag == SolutionTag::AboveBowl);
  CHECK(t.classify(1.0, 0.9).tag == SolutionTag::BelowBowl);
  CHECK(t.classify(1.0, 2.0).tag == SolutionTag::GammaMinusBlowup);
  // constants keep the caller's sign
  CHECK(t.classify(1.0, -1.0).tag == SolutionTag::ConstantMinus);
}

TEST_CASE("limits of a barrier trajectory") {
  const auto c = n3().classify(1.0, 1.0);
  CHECK(c.evidence.limits.at_zero.value == 1.0);
  CHECK(c.evidence.limits.at_infinity.value == 1.0);
}
