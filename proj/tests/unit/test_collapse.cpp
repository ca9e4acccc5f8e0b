#include "doctest.h"

#include <algorithm>
#include <cmath>

#include "mipt/collapse.hpp"
#include "mipt/errors.hpp"
#include "mipt/rng.hpp"

using namespace mipt;
using namespace mipt::collapse;

namespace {

const std::vector<double> kSizes{12, 16, 20, 24, 32, 44};

std::vector<double> grid(double lo, double hi, double step) {
  std::vector<double> g;
  for (int i = 0; lo + i * step <= hi + 1e-9; ++i) g.push_back(lo + i * step);
  return g;
}

// value = f(L^{1/nu} (gamma - gamma_c)) without noise, fixed errors.
ScalingDataset exact_data(double gc, double nu, double (*f)(double)) {
  ScalingDataset d;
  for (double L : kSizes) {
    for (double g : grid(2.4, 3.4, 0.1)) {
      d.points.push_back({L, g, f(std::pow(L, 1.0 / nu) * (g - gc)), 0.01});
    }
  }
  return d;
}

double linear(double x) { return 0.5 - 0.1 * x; }

}  // namespace

TEST_CASE("dataset validation") {
  ScalingDataset d;
  d.points = {{8, 1, 1, 0.1}, {8, 2, 1, 0.1}, {12, 1, 1, 0.1}};
  CHECK_THROWS_AS(d.validate(), InvalidInput);
  d.points.push_back({16, 1, 1, 0.1});
  CHECK_NOTHROW(d.validate());
  CHECK(d.sizes() == std::vector<double>{8, 12, 16});
  d.points.push_back({16, 2, 1, 0.0});
  CHECK_THROWS_AS(d.validate(), InvalidInput);
  CHECK(d.window(1.5, 2.5).points.size() == 2);
}

TEST_CASE("exact linear collapse has zero quality") {
  const auto d = exact_data(2.9, 1.4, linear);
  CHECK(quality(d, 1.4, 2.9) < 1e-10);
  CHECK(quality(d, 1.0, 2.9) > 1.0);
  CHECK(quality(d, 1.4, 3.1) > 1.0);
  const auto mc = master_curve(d, 1.4, 2.9);
  CHECK(mc.points.size() == d.points.size());
  CHECK(mc.excluded > 0);  // the ends of the x range have no covering neighbours
  CHECK(std::isinf(quality(d, -1.0, 2.9)));
}

TEST_CASE("quality is invariant under rescaling and reordering") {
  auto d = exact_data(2.9, 1.4, logistic_shape);
  CounterRng rng(3, Stream::test);
  for (auto& p : d.points) p.value *= 1.0 + 0.03 * (rng.uniform() - 0.5);
  const double q = quality(d, 1.3, 2.85);
  auto scaled = d;
  for (auto& p : scaled.points) {
    p.value *= 7.0;
    p.std_err *= 7.0;
  }
  CHECK(quality(scaled, 1.3, 2.85) == doctest::Approx(q).epsilon(1e-12));
  auto shuffled = d;
  std::reverse(shuffled.points.begin(), shuffled.points.end());
  std::rotate(shuffled.points.begin(), shuffled.points.begin() + 17, shuffled.points.end());
  CHECK(quality(shuffled, 1.3, 2.85) == doctest::Approx(q).epsilon(1e-12));
}

TEST_CASE("a single size cannot be collapsed") {
  ScalingDataset d;
  for (double g : grid(2.4, 3.4, 0.1)) d.points.push_back({16, g, 1.0 / g, 0.01});
  CHECK_THROWS_AS(fit_collapse(d, 2.9, 1.4), InvalidInput);
}

TEST_CASE("Nelder-Mead and Hessian on known functions") {
  const auto rosen = [](const Eigen::VectorXd& x) {
    return 100.0 * std::pow(x(1) - x(0) * x(0), 2) + std::pow(1.0 - x(0), 2);
  };
  const auto r = nelder_mead(rosen, Eigen::Vector2d(-1.2, 1.0), Eigen::Vector2d(0.1, 0.1), 1e-8,
                             1e-14, 5000);
  CHECK(r.converged);
  CHECK(r.x(0) == doctest::Approx(1.0).epsilon(1e-5));
  CHECK(r.x(1) == doctest::Approx(1.0).epsilon(1e-5));

  const auto quad = [](const Eigen::VectorXd& x) {
    return 3.0 * x(0) * x(0) + x(0) * x(1) + 2.0 * x(1) * x(1);
  };
  const Eigen::MatrixXd h = hessian(quad, Eigen::Vector2d(0.4, -2.0), 1e-3);
  CHECK(h(0, 0) == doctest::Approx(6.0));
  CHECK(h(0, 1) == doctest::Approx(1.0));
  CHECK(h(1, 0) == h(0, 1));
  CHECK(h(1, 1) == doctest::Approx(4.0));
}

TEST_CASE("synthetic recovery at two sigma") {
  // The local linear master curve is biased towards larger nu once
  // L^{1/nu} dgamma approaches the width of the scaling function; at
  // dgamma = 0.025 that stays below the noise.
  const double gc = 2.9, nu = 1.4;
  const auto gammas = grid(2.4, 3.4, 0.025);
  const std::vector<double> sizes{12, 16, 20, 24, 28, 32, 36, 40, 44};
  int within = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto d = synthetic_dataset(gc, nu, sizes, gammas, 0.03, seed);
    const auto r = fit_collapse(d, 2.8, 1.2);
    CHECK(r.converged);
    if (r.errors_reliable && std::abs(r.gamma_c - gc) <= 2.0 * r.gamma_c_err &&
        std::abs(r.nu - nu) <= 2.0 * r.nu_err) {
      ++within;
    }
  }
  CHECK(within >= 18);
}

TEST_CASE("fit with zeta reports three parameters") {
  const auto d = synthetic_dataset(2.9, 1.4, kSizes, grid(2.4, 3.4, 0.1), 0.03, 99);
  FitOptions opt;
  opt.fit_zeta = true;
  const auto r = fit_collapse(d, 2.85, 1.3, opt);
  REQUIRE(r.zeta);
  REQUIRE(r.zeta_err);
  CHECK(r.covariance.rows() == 3);
  CHECK(std::abs(*r.zeta) < 0.2);
  CHECK_THROWS_AS(fit_collapse(d, 4.0, 1.3), InvalidInput);
}

TEST_CASE("cubic extrapolation is exact on cubics") {
  const std::vector<double> q{0.1, 0.25, 0.4, 0.7, 1.0};
  std::vector<double> y, dy;
  for (double x : q) {
    y.push_back(0.8 + 2.0 * x - 1.5 * x * x + 0.5 * x * x * x);
    dy.push_back(0.01 * (1.0 + x));
  }
  const auto r = extrapolate_q0(q, y, dy);
  CHECK(std::abs(r.value - 0.8) < 1e-12);
  CHECK(r.std_err > 0.0);

  // Error scales with the input errors.
  for (auto& e : dy) e *= 3.0;
  CHECK(extrapolate_q0(q, y, dy).std_err == doctest::Approx(3.0 * r.std_err));

  const std::vector<double> repeated{0.1, 0.1, 0.1, 0.4, 0.7};
  CHECK_THROWS_AS(extrapolate_q0(repeated, y, dy), InvalidInput);
  dy[2] = 0.0;
  CHECK_THROWS_AS(extrapolate_q0(q, y, dy), InvalidInput);
  CHECK_THROWS_AS(extrapolate_q0(std::span(q).first(4), std::span(y).first(4),
                                 std::span(dy).first(4)),
                  InvalidInput);
}

TEST_CASE("crossings") {
  const auto gammas = grid(2.45, 3.35, 0.1);
  std::vector<Curve> parallel;
  for (double L : {12.0, 16.0, 20.0}) {
    Curve c{L, gammas, {}};
    for (double g : gammas) c.value.push_back(L * 0.01 + 1.0 / g);
    parallel.push_back(c);
  }
  CHECK_FALSE(crossing_locator(parallel).found);

  const auto d = synthetic_dataset(2.9, 1.4, kSizes, gammas, 1e-12, 1);
  const auto est = crossing_locator(curves_from(d));
  REQUIRE(est.found);
  CHECK(est.crossings.size() == kSizes.size() - 1);
  CHECK(est.median == doctest::Approx(2.9).epsilon(0.01));
  CHECK(est.spread < 0.02);
}
