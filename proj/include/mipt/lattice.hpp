#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <span>
#include <vector>

namespace mipt {

using Index = Eigen::Index;
using Coord = std::vector<int>;

/// d-dimensional hypercubic lattice of linear size L with periodic
/// boundaries and nearest-neighbour hopping J.
///
/// Sites and momenta are both d-tuples in [0, L)^d, linearized row-major:
/// the first axis is the most significant digit,
///   index = ((m_0 * L + m_1) * L + m_2) ...
/// A momentum tuple m stands for k_i = 2 pi m_i / L.
struct LatticeSpec {
  int dim = 2;
  int size = 16;
  double hopping = 1.0;

  Index num_sites() const;
  void validate() const;

  Coord coords(Index site) const;
  Index index(std::span<const int> coords) const;
  /// Site reached from `site` by displacement `disp`, wrapped periodically.
  Index shift(Index site, std::span<const int> disp) const;

  bool operator==(const LatticeSpec&) const = default;
};

/// Tight-binding energy -2J sum_i cos(k_i). Throws InvalidInput when some
/// k_i is not a multiple of 2 pi / L (tolerance 1e-9 in units of 2 pi / L).
double dispersion(const LatticeSpec& spec, std::span<const double> k);
/// Same, for an integer momentum tuple.
double dispersion(const LatticeSpec& spec, std::span<const int> m);

/// Single-particle eigenbasis of the hopping Hamiltonian.
///
/// basis(alpha, x) = N^{-1/2} exp(i k_alpha . x) is the amplitude of mode
/// alpha on site x, so the coordinate Green function is V^dagger G~ V.
/// Modes are ordered by energy; exactly degenerate energies (equal after
/// rounding to 1e-9 J) are ordered lexicographically by momentum tuple.
struct Spectrum {
  LatticeSpec lattice;
  Eigen::VectorXd energies;
  Eigen::MatrixXcd basis;
  std::vector<Coord> momenta;

  Index size() const { return energies.size(); }
};

Spectrum build_spectrum(const LatticeSpec& spec);

/// Real-space single-particle Hamiltonian h_{xy}, built by summing -J over
/// every link (so L = 2 carries a doubled bond, consistent with the
/// dispersion).
Eigen::MatrixXd hopping_matrix(const LatticeSpec& spec);

struct VelocityScales {
  double v;   ///< Brillouin-zone rms velocity sqrt(2d) J
  double v0;  ///< v / sqrt(d) = sqrt(2) J
};

VelocityScales velocity_scales(const LatticeSpec& spec);

}  // namespace mipt
