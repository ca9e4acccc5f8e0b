#include "doctest.h"

#include <cmath>
#include <numbers>

#include "mipt/errors.hpp"
#include "mipt/theory.hpp"

using namespace mipt;
using namespace mipt::theory;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST_CASE("bare parameters") {
  NLSMParams p;
  p.d = 2.0;
  p.hopping = 1.0;
  p.gamma = 1.0;
  CHECK(p.v() == doctest::Approx(2.0));
  CHECK(p.v0() == doctest::Approx(std::sqrt(2.0)));
  CHECK(p.g0() == doctest::Approx(0.25 * std::sqrt(2.0)));
  CHECK(bare_coupling(p) == p.g0());
  CHECK(p.l0() == doctest::Approx(1.0));
  CHECK(p.G0() == doctest::Approx(p.g0()));
  p.gamma = 0.5;
  CHECK(p.g0() == doctest::Approx(0.5 * std::sqrt(2.0)));
  CHECK(p.G0() == doctest::Approx(p.g0() * 2.0));
  p.gamma = 0.0;
  CHECK_THROWS_AS(p.validate(), InvalidInput);
}

TEST_CASE("sphere areas") {
  CHECK(sphere_area(0.0) == doctest::Approx(2.0));
  CHECK(sphere_area(1.0) == doctest::Approx(2.0 * kPi));
  CHECK(sphere_area(2.0) == doctest::Approx(4.0 * kPi));
  CHECK(sphere_area(3.0) == doctest::Approx(2.0 * kPi * kPi));
}

TEST_CASE("Gaussian-level correlators") {
  NLSMParams p;
  for (double q : {0.01, 0.1, 1.0}) CHECK(gaussian_correlator_q(p, q) / q == doctest::Approx(p.g0()));
  CHECK(gaussian_correlator_x(p, 2.0) ==
        doctest::Approx(-2.0 * p.g0() / (sphere_area(2.0) * 8.0)));
  CHECK(gaussian_cumulant(p, p.l0()) == 0.0);
  CHECK(gaussian_cumulant(p, 10.0 * p.l0()) ==
        doctest::Approx(p.g0() / kPi * sphere_area(1.0) * 10.0 * std::log(10.0)));
  CHECK_THROWS_AS(gaussian_cumulant(p, 0.5 * p.l0()), InvalidInput);
  CHECK(gaussian_cumulant_area(p, 3.0, 10.0 * p.l0()) ==
        doctest::Approx(p.g0() / kPi * 3.0 * std::log(10.0)));
}

TEST_CASE("beta function vanishes at the fixed point") {
  for (double eps : {0.1, 0.5, 1.0, 2.0}) {
    const auto cq = critical_quantities(eps, 1.0, 1.0, 1.0);
    CHECK(cq.G_c == doctest::Approx(1.0 / (4.0 * kPi * eps)));
    CHECK(std::abs(beta(cq.G_c, eps)) < 1e-15);
    CHECK(cq.nu == doctest::Approx(1.0 / eps));
    CHECK(cq.zeta == 0.0);
  }
  CHECK(beta(1.0, 0.0, 2.0) == doctest::Approx(-2.0 / (4.0 * kPi)));
}

TEST_CASE("RK4 flow matches the closed form over ten decades") {
  struct Case {
    double eps;
    double G0;
  };
  for (const Case c : {Case{0.0, 5.0}, Case{0.1, 1.0}, Case{1.0, 0.2}}) {
    CAPTURE(c.eps);
    const auto flow = rg_flow(c.G0, c.eps, 1.0, 1.0, 1e10);
    REQUIRE_FALSE(flow.localized);
    REQUIRE(flow.states.size() >= 101);
    CHECK(flow.states.front().G == c.G0);
    CHECK(flow.states.back().ell == doctest::Approx(1e10));
    double worst = 0.0;
    for (const auto& s : flow.states) {
      const double ref = rg_closed_form(c.G0, c.eps, 1.0, std::log(s.ell));
      CHECK(s.G_exact == doctest::Approx(ref).epsilon(1e-14));
      worst = std::max(worst, std::abs(s.G - ref) / std::abs(ref));
      CHECK(s.Z == 1.0);
    }
    CHECK(worst < 1e-10);
  }
}

TEST_CASE("flow below the fixed point localizes where the closed form hits zero") {
  const double eps = 1.0;
  const double gc = 1.0 / (4.0 * kPi);
  const double g0 = 0.05;
  const auto flow = rg_flow(g0, eps, 1.0, 1.0, 1e6);
  REQUIRE(flow.localized);
  const double t_star = std::log(gc / (gc - g0));
  CHECK(std::log(flow.ell_localized) == doctest::Approx(t_star).epsilon(1e-8));
  CHECK(std::abs(flow.states.back().G) < 1e-10);
}

TEST_CASE("one dimension: the conductance only decreases, no transition") {
  NLSMParams p;
  p.d = 1.0;
  p.gamma = 0.1;
  const auto flow = rg_flow(p, 1e8);
  for (std::size_t i = 1; i < flow.states.size(); ++i) {
    CHECK(flow.states[i].G < flow.states[i - 1].G);
  }
  CHECK_THROWS_AS(critical_quantities(p), NoTransition);
  CHECK_THROWS_AS(critical_quantities(-0.5, 1.0, 1.0, 1.0), NoTransition);
}

TEST_CASE("correlation length") {
  const auto cq = critical_quantities(1.0, 1.0, 2.0 / (4.0 * kPi), 0.5);
  CHECK(cq.l_corr == doctest::Approx(0.5));
  const auto at = critical_quantities(1.0, 1.0, 1.0 / (4.0 * kPi), 0.5);
  CHECK(std::isinf(at.l_corr));
}

TEST_CASE("scaling-function branches") {
  CHECK(scaling_function(Phase::critical, 3.0, 1.0, 2.0).value == 1.0);
  CHECK(scaling_function(Phase::metallic, 0.25, 2.0, 2.0).value == doctest::Approx(1.5));
  CHECK(scaling_function(Phase::localized, 0.25, 2.0, 2.0).value == doctest::Approx(0.5));
  CHECK(scaling_function(Phase::metallic, 3.0, 1.0, 3.0).value == doctest::Approx(9.0));
  CHECK(scaling_function(Phase::localized, 2.0, 1.0, 2.0).value == doctest::Approx(std::exp(-2.0)));
  CHECK(scaling_function(Phase::localized, 2.0, 1.0, 2.0).regime.find("localized") !=
        std::string::npos);
  CHECK(covariance_scaling(Phase::critical, 5.0, 2.0, 0.3).value == doctest::Approx(0.3));
  CHECK(covariance_scaling(Phase::metallic, 4.0, 2.0, 0.3, 2.0).value == doctest::Approx(8.0));
  CHECK(covariance_scaling(Phase::localized, 1.0, 2.0, 0.3, 1.0, 1.0, 2.0).value ==
        doctest::Approx(std::exp(-2.0)));
  CHECK(to_string(Phase::metallic) == "metallic");
}
