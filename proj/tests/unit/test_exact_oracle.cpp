#include "doctest.h"

#include <bit>
#include <cmath>

#include "mipt/errors.hpp"
#include "mipt/exact_oracle.hpp"
#include "support.hpp"

using namespace mipt;
using namespace mipt::exact;

TEST_CASE("Fock basis enumeration and rank") {
  const FockBasis b(6, 3);
  CHECK(b.size() == 20);
  for (Index i = 0; i < b.size(); ++i) {
    CHECK(std::popcount(b.state(i)) == 3);
    CHECK(b.rank(b.state(i)) == i);
    if (i) CHECK(b.state(i - 1) < b.state(i));
  }
  CHECK_THROWS_AS(FockBasis(13, 2), InvalidInput);
  CHECK_THROWS_AS(FockBasis(4, 5), InvalidInput);
  CHECK_THROWS_AS(b.rank(0b1), InvalidInput);
}

TEST_CASE("Slater state reproduces its Green function and obeys Wick") {
  const auto g = testing::random_projector(7, 3, 12);
  const auto psi = slater_state(g);
  CHECK(psi.norm() == doctest::Approx(1.0));
  CHECK((exact_green(psi) - g).cwiseAbs().maxCoeff() < 1e-12);
  for (int a : {0, 2, 5}) {
    for (int b : {1, 3}) {
      for (int c : {0, 4}) {
        for (int d : {2, 6}) {
          CHECK(std::abs(four_point(psi, a, b, c, d) - wick_four_point(g, a, b, c, d)) < 1e-12);
        }
      }
    }
  }
  CHECK_THROWS_AS(slater_state(0.5 * g), InvalidInput);
}

TEST_CASE("projective measurement on a product state") {
  const std::vector<std::uint8_t> occ{1, 0, 1, 0};
  auto psi = product_state(occ);
  CHECK(occupation_probability(psi, 0) == doctest::Approx(1.0));
  CHECK(occupation_probability(psi, 1) == doctest::Approx(0.0));
  CHECK_THROWS_AS(exact_measure(psi, 1, true), ForbiddenOutcome);
  const auto r = exact_measure(psi, 2, true);
  CHECK(r.click);
  CHECK(r.probability == doctest::Approx(1.0));
  CHECK_THROWS_AS(exact_measure(psi, 9, false), InvalidInput);
}

TEST_CASE("many-body Hamiltonian is Hermitian and evolution is unitary") {
  LatticeSpec s;
  s.dim = 1;
  s.size = 6;
  const auto basis = std::make_shared<const FockBasis>(6, 3);
  const ManyBodyHamiltonian h(basis, hopping_matrix(s));
  CHECK((h.matrix() - h.matrix().adjoint()).cwiseAbs().maxCoeff() < 1e-14);
  const std::vector<std::uint8_t> occ{1, 1, 1, 0, 0, 0};
  auto psi = product_state(occ);
  h.evolve(psi, 0.7);
  CHECK(psi.norm() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(exact_green(psi).trace().real() == doctest::Approx(3.0));
  CHECK_THROWS_AS(exact_evolve(psi, hopping_matrix(s), -1.0), InvalidInput);
}

TEST_CASE("lockstep against the Gaussian engine") {
  TrajectoryConfig c;
  c.lattice.dim = 2;
  c.lattice.size = 3;
  c.gamma = 1.0;
  c.initial = InitialState::coordinate_bitstring;
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto r = oracle_check(c, 60, seed);
    CHECK(r.schedule.events.size() == 60);
    CHECK(r.outcomes.size() == 60);
    CHECK(r.report.steps == 60);
    CHECK(r.report.max_probability_deviation < 1e-10);
    CHECK(r.report.max_green_deviation < 1e-8);
  }
  c.lattice.dim = 1;
  c.lattice.size = 10;
  c.initial = InitialState::ground;
  const auto r = oracle_check(c, 80, 4);
  CHECK(r.report.initial_green_deviation < 1e-12);
  CHECK(r.report.max_green_deviation < 1e-8);
}
