#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "mipt/lattice.hpp"

namespace mipt {

/// Set of lattice sites, kept sorted and unique.
class Region {
 public:
  Region() = default;
  static Region from_sites(const LatticeSpec& spec, std::vector<Index> sites);
  /// Product of per-axis intervals [start_i, start_i + length_i), wrapped
  /// periodically. `ranges` holds one (start, length) pair per axis.
  static Region box(const LatticeSpec& spec, std::span<const std::pair<int, int>> ranges);
  /// Slab of `width` consecutive values of coordinate `axis` starting at
  /// `start`, spanning every other axis.
  static Region strip(const LatticeSpec& spec, int axis, int start, int width);

  const std::vector<Index>& sites() const { return sites_; }
  std::size_t size() const { return sites_.size(); }
  bool contains(Index site) const;
  bool overlaps(const Region& other) const;
  Region united(const Region& other) const;

 private:
  std::vector<Index> sites_;
};

/// The two full-height strips used for the covariance and mutual
/// information: A = axis-0 columns [0, L/4), B = [L/2, 3L/4). Both gaps
/// between them are L/4 on the torus. Needs L divisible by 4.
std::pair<Region, Region> quarter_strips(const LatticeSpec& spec);

/// Sub-matrix G_A of a Green function on a region.
Eigen::MatrixXcd restrict_to(const Eigen::MatrixXcd& green, const Region& region);

/// C_{xy} = G_xx delta_xy - |G_xy|^2, the connected density-density
/// correlator of a Gaussian state.
Eigen::MatrixXd density_correlator(const Eigen::MatrixXcd& green);

/// Translation average over one sample: C(r) = (1/N) sum_x C_{x, x+r}, as
/// a vector indexed by the linearized displacement r.
Eigen::VectorXd displacement_correlator(const LatticeSpec& spec, const Eigen::MatrixXcd& green);

/// C(q) = sum_r C(r) exp(-i q.r) on the momentum grid (same linearization).
/// The input must be inversion symmetric, C(r) = C(-r), so the result is
/// real; the imaginary part is discarded.
Eigen::VectorXd momentum_transform(const LatticeSpec& spec, const Eigen::VectorXd& c_r);

/// Cut of a momentum grid along the axes, for m = 0..floor(L/2): the mean
/// over the d axis directions and over +q and -q.
Eigen::VectorXd axis_cut(const LatticeSpec& spec, const Eigen::VectorXd& c_q);

/// q = 2 pi m / L and q~ = 2 sin(q / 2) for cut index m.
double cut_momentum(const LatticeSpec& spec, int m);
double q_tilde(double q);
/// Chord length l~ = (L / pi) sin(pi l / L).
double chord_length(int size, double ell);

/// Var(N_A) = Tr G_A - ||G_A||_F^2.
double cumulant2(const Eigen::MatrixXcd& green, const Region& a);

/// Eigenvalues of G_A, checked to lie in [-1e-8, 1 + 1e-8]; throws
/// NumericalDegradation otherwise.
Eigen::VectorXd region_spectrum(const Eigen::MatrixXcd& green, const Region& a);

/// Binary entropy sum -l ln l - (1-l) ln(1-l) with l clamped to
/// [1e-14, 1 - 1e-14]; exactly 0 for l at the clamp.
double entropy_from_spectrum(const Eigen::VectorXd& eigenvalues);

/// von Neumann entanglement entropy of region A, in nats.
double entanglement_entropy(const Eigen::MatrixXcd& green, const Region& a);

/// G_AB = sum_{x in A, y in B} |G_xy|^2 = -<<N_A N_B>>. Throws InvalidInput
/// for overlapping regions.
double covariance(const Eigen::MatrixXcd& green, const Region& a, const Region& b);

struct MutualInformation {
  double value;       ///< S(A) + S(B) - S(A u B)
  double covariance;  ///< G_AB
  double ratio;       ///< value / ((2 pi^2 / 3) G_AB); NaN when G_AB = 0
};

MutualInformation mutual_information(const Eigen::MatrixXcd& green, const Region& a,
                                     const Region& b);

/// Cumulants kappa_1..kappa_max_order of the number of particles in A, from
/// the series of log prod_i (1 - l_i + l_i e^s) over the eigenvalues l_i of
/// G_A. Element n-1 holds kappa_n. max_order must lie in [1, 40].
std::vector<double> fcs_cumulants(const Eigen::MatrixXcd& green, const Region& a,
                                  int max_order);
std::vector<double> fcs_cumulants_from_spectrum(const Eigen::VectorXd& eigenvalues,
                                                int max_order);

/// Partial sums S_Q = sum_{q=1..Q} 2 zeta(2q) kappa_{2q}, for Q = 1..,
/// as far as the cumulant list allows.
std::vector<double> klich_levitov_partial_sums(std::span<const double> cumulants);

/// One sample of the strip profile for widths l = 1..L/2 (strip along axis 0).
struct StripProfile {
  std::vector<double> entropy;
  std::vector<double> cumulant2;
  std::vector<double> ratio;  ///< entropy / cumulant2; NaN when cumulant2 = 0
};

StripProfile strip_profile(const LatticeSpec& spec, const Eigen::MatrixXcd& green);

/// Mean and variance accumulator over equally weighted vector samples
/// (Welford). merge() is the pairwise update of Chan et al., so partial
/// accumulators combine in any grouping.
class RunningStats {
 public:
  RunningStats() = default;
  explicit RunningStats(Index dim);
  RunningStats(std::size_t count, Eigen::VectorXd mean, Eigen::VectorXd m2);

  void push(const Eigen::VectorXd& sample);
  void merge(const RunningStats& other);

  std::size_t count() const { return count_; }
  Index dim() const { return mean_.size(); }
  const Eigen::VectorXd& mean() const { return mean_; }
  const Eigen::VectorXd& m2() const { return m2_; }
  /// Standard error of the mean, sqrt(M2 / (n (n-1))); NaN for n < 2.
  Eigen::VectorXd std_err() const;

 private:
  std::size_t count_ = 0;
  Eigen::VectorXd mean_;
  Eigen::VectorXd m2_;
};

/// Trajectory-averaged correlators.
struct CorrelatorEstimate {
  LatticeSpec lattice;
  std::size_t n_trajectories = 0;
  Eigen::VectorXd real_mean, real_err;  ///< C(r), by displacement index
  Eigen::VectorXd grid_mean, grid_err;  ///< C(q), by momentum index
  Eigen::VectorXd cut_mean, cut_err;    ///< axis cut, m = 0..L/2
};

/// Averages the translation-averaged correlator over trajectories. The
/// errors come from trajectory-to-trajectory scatter and are NaN for a
/// single trajectory.
CorrelatorEstimate translation_average(const LatticeSpec& spec,
                                       std::span<const Eigen::MatrixXcd> greens);

}  // namespace mipt
