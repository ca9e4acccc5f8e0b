#include "doctest.h"

#include <cmath>
#include <numbers>

#include "mipt/errors.hpp"
#include "mipt/lattice.hpp"

using namespace mipt;

namespace {

LatticeSpec spec(int d, int L, double J = 1.0) {
  LatticeSpec s;
  s.dim = d;
  s.size = L;
  s.hopping = J;
  return s;
}

}  // namespace

TEST_CASE("dispersion at band bottom, top and centre") {
  const auto s = spec(2, 4);
  const double pi = std::numbers::pi;
  CHECK(dispersion(s, std::vector<double>{0.0, 0.0}) == doctest::Approx(-4.0));
  CHECK(dispersion(s, std::vector<double>{pi, pi}) == doctest::Approx(4.0));
  CHECK(std::abs(dispersion(s, std::vector<double>{pi / 2, pi / 2})) < 1e-14);
  CHECK_THROWS_AS(dispersion(s, std::vector<double>{0.3, 0.0}), InvalidInput);
  CHECK_THROWS_AS(dispersion(s, std::vector<double>{0.0}), InvalidInput);
}

TEST_CASE("two-site chain has energies -2J and +2J") {
  const Spectrum sp = build_spectrum(spec(1, 2, 1.5));
  REQUIRE(sp.size() == 2);
  CHECK(sp.energies(0) == doctest::Approx(-3.0));
  CHECK(sp.energies(1) == doctest::Approx(3.0));
}

TEST_CASE("4x4 zero modes counted by direct enumeration") {
  // cos(pi m1 / 2) + cos(pi m2 / 2) = 0 for (1,1), (1,3), (3,1), (3,3),
  // (0,2) and (2,0).
  int expected = 0;
  for (int a = 0; a < 4; ++a) {
    for (int b = 0; b < 4; ++b) {
      if (std::abs(std::cos(std::numbers::pi * a / 2) + std::cos(std::numbers::pi * b / 2)) <
          1e-12) {
        ++expected;
      }
    }
  }
  CHECK(expected == 6);
  const Spectrum sp = build_spectrum(spec(2, 4));
  REQUIRE(sp.size() == 16);
  int zeros = 0;
  for (Eigen::Index i = 0; i < sp.size(); ++i) zeros += std::abs(sp.energies(i)) < 1e-12;
  CHECK(zeros == expected);
}

TEST_CASE("energies sorted, ties ordered by momentum tuple") {
  const Spectrum sp = build_spectrum(spec(2, 6));
  for (Eigen::Index a = 1; a < sp.size(); ++a) {
    CHECK(sp.energies(a - 1) <= sp.energies(a) + 1e-12);
    if (std::abs(sp.energies(a - 1) - sp.energies(a)) < 1e-9) {
      CHECK(sp.momenta[static_cast<std::size_t>(a - 1)] <
            sp.momenta[static_cast<std::size_t>(a)]);
    }
  }
}

TEST_CASE("basis is unitary and diagonalizes the hopping matrix") {
  for (const auto& s : {spec(1, 64), spec(2, 8), spec(2, 16, 0.7), spec(3, 6), spec(3, 4, 2.0)}) {
    const Spectrum sp = build_spectrum(s);
    const Eigen::Index n = sp.size();
    const Eigen::MatrixXcd vvd = sp.basis * sp.basis.adjoint();
    CHECK((vvd - Eigen::MatrixXcd::Identity(n, n)).cwiseAbs().maxCoeff() < 1e-12);

    const Eigen::MatrixXd h = hopping_matrix(s);
    // Plane wave psi_alpha(x) = V_{alpha x}: H psi_alpha = E_alpha psi_alpha.
    const Eigen::MatrixXcd hv = h * sp.basis.transpose();
    for (Eigen::Index a = 0; a < n; ++a) {
      const Eigen::VectorXcd col = sp.basis.row(a).transpose();
      CHECK((hv.col(a) - sp.energies(a) * col).cwiseAbs().maxCoeff() < 1e-11);
      CHECK(dispersion(s, std::span<const int>(sp.momenta[static_cast<std::size_t>(a)])) ==
            doctest::Approx(sp.energies(a)));
    }
  }
}

TEST_CASE("bipartite spectrum: E(k + pi) = -E(k)") {
  const auto s = spec(2, 8);
  for (int a = 0; a < 8; ++a) {
    for (int b = 0; b < 8; ++b) {
      const std::vector<int> m{a, b};
      const std::vector<int> shifted{(a + 4) % 8, (b + 4) % 8};
      CHECK(dispersion(s, std::span<const int>(m)) ==
            doctest::Approx(-dispersion(s, std::span<const int>(shifted))));
    }
  }
}

TEST_CASE("velocity scales") {
  auto v = velocity_scales(spec(2, 4));
  CHECK(v.v == doctest::Approx(2.0));
  CHECK(v.v0 == doctest::Approx(std::sqrt(2.0)));
  v = velocity_scales(spec(1, 4));
  CHECK(v.v == doctest::Approx(std::sqrt(2.0)));
  CHECK(v.v0 == doctest::Approx(std::sqrt(2.0)));
  v = velocity_scales(spec(3, 4, 2.0));
  CHECK(v.v == doctest::Approx(2.0 * std::sqrt(6.0)));
  CHECK(v.v0 == doctest::Approx(2.0 * std::sqrt(2.0)));
}

TEST_CASE("site indexing round trip and periodic shift") {
  const auto s = spec(3, 5);
  for (Eigen::Index x = 0; x < s.num_sites(); ++x) {
    const Coord c = s.coords(x);
    CHECK(s.index(c) == x);
  }
  const std::vector<int> back{-1, 0, 6};
  const Coord c = s.coords(s.shift(0, back));
  CHECK(c == Coord{4, 0, 1});
  CHECK_THROWS_AS(spec(0, 4).validate(), InvalidInput);
  CHECK_THROWS_AS(spec(2, 1).validate(), InvalidInput);
  CHECK_THROWS_AS(spec(2, 4, 0.0).validate(), InvalidInput);
}
