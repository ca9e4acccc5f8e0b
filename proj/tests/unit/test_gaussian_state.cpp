#include "doctest.h"

#include <cmath>
#include <complex>
#include <filesystem>
#include <random>

#include "mipt/errors.hpp"
#include "mipt/gaussian_state.hpp"
#include "mipt/lattice.hpp"
#include "mipt/rng.hpp"
#include "support.hpp"

using namespace mipt;
using cd = std::complex<double>;

namespace {

using testing::random_projector;
using testing::spectrum;

// Dense projector updates on the coordinate Green function.
Eigen::MatrixXcd dense_click(const Eigen::MatrixXcd& g, Eigen::Index s) {
  const double n = g(s, s).real();
  Eigen::MatrixXcd out = g - g.col(s) * g.row(s) / n;
  out(s, s) += 1.0;
  return out;
}

Eigen::MatrixXcd dense_noclick(const Eigen::MatrixXcd& g, Eigen::Index s) {
  const double n = g(s, s).real();
  Eigen::VectorXcd e = Eigen::VectorXcd::Zero(g.rows());
  e(s) = 1.0;
  const Eigen::VectorXcd u = e - g.col(s);
  return g - e * e.adjoint() + u * u.adjoint() / (1.0 - n);
}

double max_abs(const Eigen::MatrixXcd& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("ground state fills the lowest modes") {
  auto sp = spectrum(1, 2);
  auto g = GaussianState::ground(sp, 0.5);
  Eigen::MatrixXcd expected = Eigen::MatrixXcd::Zero(2, 2);
  expected(0, 0) = 1.0;
  CHECK(max_abs(g.gtilde() - expected) == 0.0);

  auto sp44 = spectrum(2, 4);
  auto a = GaussianState::ground(sp44, 0.5);
  auto b = GaussianState::ground(sp44, 0.5);
  CHECK(a.n_particles() == 8);
  CHECK(std::abs(a.gtilde().trace().real() - 8.0) < 1e-14);
  CHECK(a.gtilde() == b.gtilde());
  for (Eigen::Index i = 0; i < 16; ++i) {
    CHECK(a.gtilde()(i, i).real() == (i < 8 ? 1.0 : 0.0));
  }
}

TEST_CASE("bitstring initial states") {
  auto sp = spectrum(2, 4);
  std::vector<std::uint8_t> pattern(16, 0);
  pattern[0] = 1;
  auto eig = GaussianState::from_pattern(sp, Basis::eigen, pattern);
  Eigen::MatrixXcd d = Eigen::MatrixXcd::Zero(16, 16);
  d(0, 0) = 1.0;
  CHECK(max_abs(eig.gtilde() - d) == 0.0);

  std::vector<std::uint8_t> full(16, 1);
  auto filled = GaussianState::from_pattern(sp, Basis::coordinate, full);
  CHECK(max_abs(filled.gtilde() - Eigen::MatrixXcd::Identity(16, 16)) < 1e-12);

  CounterRng rng(5, Stream::initial_state);
  auto random = GaussianState::random_pattern(sp, Basis::coordinate, 0.5, rng);
  CHECK(random.purity_deviation() < 1e-12);
  CHECK(random.n_particles() == 8);
  const Eigen::MatrixXcd g = random.coordinate_green();
  for (Eigen::Index x = 0; x < 16; ++x) {
    CHECK(std::abs(g(x, x).real() * (1.0 - g(x, x).real())) < 1e-12);
  }

  CHECK_THROWS_AS(GaussianState::from_pattern(sp, Basis::coordinate, std::vector<std::uint8_t>(3)),
                  InvalidInput);
}

TEST_CASE("evolution is an exact phase rotation") {
  auto sp = spectrum(2, 4);
  const Eigen::MatrixXcd p = random_projector(16, 7, 11);
  auto s = GaussianState::from_coordinate_green(sp, p);
  const Eigen::MatrixXcd g0 = s.gtilde();

  s.evolve(0.0);
  CHECK(max_abs(s.gtilde() - g0) < 1e-14);

  const double t = 3.7;
  s.evolve(1.2);
  s.evolve_to(t);
  const Eigen::MatrixXcd gt = s.gtilde();
  for (Eigen::Index a = 0; a < 16; ++a) {
    for (Eigen::Index b = 0; b < 16; ++b) {
      const cd phase = std::polar(1.0, -(sp->energies(b) - sp->energies(a)) * t);
      CHECK(std::abs(gt(a, b) - g0(a, b) * phase) < 1e-12);
    }
  }
  // Undoing the phases recovers the start.
  Eigen::MatrixXcd back = gt;
  for (Eigen::Index a = 0; a < 16; ++a) {
    for (Eigen::Index b = 0; b < 16; ++b) {
      back(a, b) *= std::polar(1.0, (sp->energies(b) - sp->energies(a)) * t);
    }
  }
  CHECK(max_abs(back - g0) < 1e-12);

  auto ground = GaussianState::ground(sp, 0.5);
  const Eigen::MatrixXcd before = ground.gtilde();
  ground.evolve(17.0);
  CHECK(max_abs(ground.gtilde() - before) == 0.0);

  CHECK_THROWS_AS(s.evolve(-1.0), InvalidInput);
  CHECK_THROWS_AS(s.evolve_to(0.5), InvalidInput);
}

TEST_CASE("two-site Bell pair: probabilities and collapse") {
  auto sp = spectrum(1, 2);
  Eigen::MatrixXcd bell(2, 2);
  bell << 0.5, 0.5, 0.5, 0.5;
  auto s = GaussianState::from_coordinate_green(sp, bell);
  CHECK(s.born_probability(0) == doctest::Approx(0.5));
  CHECK(s.born_probability(1) == doctest::Approx(0.5));

  auto click = s;
  click.apply_click(0);
  Eigen::MatrixXcd c(2, 2);
  c << 1, 0, 0, 0;
  CHECK(max_abs(click.coordinate_green() - c) < 1e-12);

  auto none = s;
  none.apply_noclick(0);
  Eigen::MatrixXcd n(2, 2);
  n << 0, 0, 0, 1;
  CHECK(max_abs(none.coordinate_green() - n) < 1e-12);
}

TEST_CASE("updates match the dense projector formulas") {
  auto sp = spectrum(2, 4);
  CounterRng rng(99, Stream::test);
  Eigen::MatrixXcd dense = random_projector(16, 6, 3);
  auto s = GaussianState::from_coordinate_green(sp, dense);
  for (int step = 0; step < 60; ++step) {
    const auto site = static_cast<Eigen::Index>(rng.below(16));
    const double p = s.born_probability(site);
    CHECK(std::abs(p - dense(site, site).real()) < 1e-12);
    const bool click = rng.uniform() < p;
    dense = click ? dense_click(dense, site) : dense_noclick(dense, site);
    s.apply_outcome(site, click);
    CHECK(max_abs(s.coordinate_green() - dense) < 1e-10);
    CHECK(s.born_probability(site) == doctest::Approx(click ? 1.0 : 0.0).epsilon(1e-10));
  }
}

TEST_CASE("lookahead probe gives the same state as plain updates") {
  auto sp = spectrum(2, 6);
  const Eigen::MatrixXcd p = random_projector(36, 18, 8);
  auto a = GaussianState::from_coordinate_green(sp, p);
  auto b = a;
  CounterRng rng(4, Stream::test);
  double t = 0.0;
  for (int k = 0; k < 40; ++k) {
    const auto site = static_cast<Eigen::Index>(rng.below(36));
    const auto next = static_cast<Eigen::Index>(rng.below(36));
    const double dt = 0.1 * rng.uniform();
    const double pa = a.born_probability(site);
    CHECK(std::abs(pa - b.born_probability(site)) < 1e-12);
    const bool click = pa > 0.5;
    a.apply_outcome(site, click, ProbeHint{next, t + dt});
    b.apply_outcome(site, click);
    t += dt;
    a.evolve_to(t);
    b.evolve_to(t);
  }
  CHECK(max_abs(a.gtilde() - b.gtilde()) < 1e-11);
}

TEST_CASE("idempotent repeated measurement and product states") {
  auto sp = spectrum(2, 4);
  const Eigen::MatrixXcd p = random_projector(16, 8, 21);
  auto s = GaussianState::from_coordinate_green(sp, p);
  s.apply_click(5);
  const Eigen::MatrixXcd once = s.gtilde();
  CHECK(s.born_probability(5) == doctest::Approx(1.0).epsilon(1e-10));
  s.apply_click(5);
  CHECK(max_abs(s.gtilde() - once) < 1e-10);
  CHECK_THROWS_AS(s.apply_noclick(5), ForbiddenOutcome);

  std::vector<std::uint8_t> pattern(16, 0);
  pattern[3] = 1;
  auto prod = GaussianState::from_pattern(sp, Basis::coordinate, pattern);
  const Eigen::MatrixXcd g = prod.gtilde();
  CHECK(prod.born_probability(3) == doctest::Approx(1.0));
  CHECK(prod.born_probability(4) == doctest::Approx(0.0));
  prod.apply_click(3);
  CHECK(max_abs(prod.gtilde() - g) < 1e-12);
  prod.apply_noclick(4);
  CHECK(max_abs(prod.gtilde() - g) < 1e-12);
  CHECK_THROWS_AS(prod.apply_click(4), ForbiddenOutcome);
}

TEST_CASE("purity and particle number over 10^4 random updates on 8x8") {
  auto sp = spectrum(2, 8);
  auto s = GaussianState::ground(sp, 0.5);
  CounterRng rng(2024, Stream::test);
  double t = 0.0;
  double worst_trace = 0.0;
  for (int k = 0; k < 10000; ++k) {
    t += rng.uniform() / 64.0;
    s.evolve_to(t);
    const auto site = static_cast<Eigen::Index>(rng.below(64));
    const double p = s.born_probability(site);
    s.apply_outcome(site, rng.uniform() < p);
    if (k % 500 == 0) worst_trace = std::max(worst_trace, s.trace_deviation());
  }
  CHECK(worst_trace < 1e-8);
  CHECK(s.trace_deviation() < 1e-8);
  CHECK(s.purity_deviation() < 1e-8);
  const Eigen::MatrixXcd g = s.gtilde();
  CHECK(max_abs(g - g.adjoint()) < 1e-10);
  const Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd>(g).eigenvalues();
  CHECK(ev.minCoeff() > -1e-8);
  CHECK(ev.maxCoeff() < 1.0 + 1e-8);
}

TEST_CASE("re-purification projects a drifted state back") {
  auto sp = spectrum(2, 4);
  const Eigen::MatrixXcd p = random_projector(16, 8, 77);
  const Eigen::MatrixXcd noise = random_projector(16, 3, 78) * 1e-9;
  auto s = GaussianState::from_eigen_green(sp, p + noise);
  CHECK(s.purity_deviation() > 1e-10);
  CHECK_FALSE(s.repurify());  // within the default 1e-8 tolerance
  s.set_repurify_policy({10000, 1e-12});
  CHECK(s.repurify());
  CHECK(s.repurification_count() == 1);
  CHECK(s.purity_deviation() < 1e-13);
  CHECK(max_abs(s.gtilde() - p) < 1e-8);

  const Eigen::MatrixXcd mixed = 0.5 * p;
  CHECK_THROWS_AS(GaussianState::from_eigen_green(sp, mixed), InvalidInput);
}

TEST_CASE("checkpoint round trip") {
  auto sp = spectrum(2, 4);
  auto s = GaussianState::from_coordinate_green(sp, random_projector(16, 8, 5), 1.25);
  s.apply_click(2);
  const auto path = std::filesystem::temp_directory_path() / "mipt_test_checkpoint.bin";
  s.save_checkpoint(path, 4242);
  const auto loaded = GaussianState::load_checkpoint(sp, path);
  CHECK(loaded.rng_cursor == 4242);
  CHECK(loaded.state.time() == s.time());
  CHECK(loaded.state.n_particles() == s.n_particles());
  CHECK(max_abs(loaded.state.gtilde() - s.gtilde()) == 0.0);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(GaussianState::load_checkpoint(sp, path), IoError);
}
