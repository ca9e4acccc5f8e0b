#pragma once

#include <Eigen/Dense>
#include <complex>
#include <memory>
#include <random>

#include "mipt/lattice.hpp"
#include "mipt/rng.hpp"

namespace mipt::testing {

inline std::shared_ptr<const Spectrum> spectrum(int d, int L, double J = 1.0) {
  LatticeSpec s;
  s.dim = d;
  s.size = L;
  s.hopping = J;
  return std::make_shared<const Spectrum>(build_spectrum(s));
}

// Projector onto n_p random orthonormal vectors.
inline Eigen::MatrixXcd random_projector(Eigen::Index n, Eigen::Index n_p, std::uint64_t seed) {
  CounterRng rng(seed, Stream::test);
  std::normal_distribution<double> normal;
  Eigen::MatrixXcd a(n, n_p);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n_p; ++j) {
      a(i, j) = std::complex<double>(normal(rng), normal(rng));
    }
  }
  const Eigen::MatrixXcd q = Eigen::HouseholderQR<Eigen::MatrixXcd>(a).householderQ() *
                             Eigen::MatrixXcd::Identity(n, n_p);
  return q * q.adjoint();
}

}  // namespace mipt::testing
