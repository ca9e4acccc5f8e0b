#pragma once

// Brute-force many-body simulator in a fixed particle-number sector, used to
// validate the Gaussian engine on small lattices (at most 12 sites).
//
// Sign convention: a basis state with occupied sites x1 < x2 < ... < xk is
//   |b> = c+_{x1} c+_{x2} ... c+_{xk} |0>,
// so c+_j |b> = (-1)^{#(occupied sites < j)} |b + j>.

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "mipt/gaussian_state.hpp"
#include "mipt/lattice.hpp"
#include "mipt/rng.hpp"
#include "mipt/trajectory.hpp"

namespace mipt::exact {

inline constexpr int kMaxSites = 12;

/// Occupation bitstrings of n sites with exactly k particles, in increasing
/// numeric order; rank() inverts the enumeration through the combinatorial
/// number system.
class FockBasis {
 public:
  FockBasis(int n_sites, int n_particles);

  int n_sites() const { return n_sites_; }
  int n_particles() const { return n_particles_; }
  Index size() const { return static_cast<Index>(states_.size()); }
  std::uint32_t state(Index i) const { return states_[static_cast<std::size_t>(i)]; }
  Index rank(std::uint32_t bits) const;

 private:
  int n_sites_;
  int n_particles_;
  std::vector<std::uint32_t> states_;
  std::vector<std::vector<Index>> binom_;
};

struct FockState {
  std::shared_ptr<const FockBasis> basis;
  Eigen::VectorXcd amplitudes;

  double norm() const { return amplitudes.norm(); }
};

/// Product state with the given 0/1 site occupations.
FockState product_state(std::span<const std::uint8_t> occupation);

/// Slater determinant with coordinate Green function `green` (must be a
/// projector). Amplitudes are det Phi[b, :] where Phi holds the occupied
/// eigenvectors of green^T, so <c+_x c_y> = green_xy. The global phase is
/// arbitrary.
FockState slater_state(const Eigen::MatrixXcd& green);

/// H = sum_xy h_xy c+_x c_y restricted to one sector, with its
/// eigendecomposition for exact propagation.
class ManyBodyHamiltonian {
 public:
  ManyBodyHamiltonian(std::shared_ptr<const FockBasis> basis, const Eigen::MatrixXd& hopping);

  const Eigen::MatrixXcd& matrix() const { return h_; }
  /// psi -> exp(-i H dt) psi.
  void evolve(FockState& state, double dt) const;

 private:
  std::shared_ptr<const FockBasis> basis_;
  Eigen::MatrixXcd h_;
  Eigen::VectorXd energies_;
  Eigen::MatrixXcd vectors_;
};

/// exp(-i H dt) |state> for the hopping matrix h; builds H every call.
void exact_evolve(FockState& state, const Eigen::MatrixXd& hopping, double dt);

struct MeasureResult {
  bool click;
  double probability;  ///< Born probability of a click before the measurement
};

/// Projective measurement of n(site): projects onto the outcome and
/// renormalizes. With `forced` the outcome is imposed (ForbiddenOutcome if
/// its probability is <= 1e-12); otherwise click iff u < p with u from rng.
MeasureResult exact_measure(FockState& state, int site, std::optional<bool> forced,
                            CounterRng* rng = nullptr);

double occupation_probability(const FockState& state, int site);

/// G_xy = <c+_x c_y>.
Eigen::MatrixXcd exact_green(const FockState& state);

/// <c+_a c+_b c_c c_d> by direct amplitude sums, and its Wick value
/// G_ad G_bc - G_ac G_bd.
std::complex<double> four_point(const FockState& state, int a, int b, int c, int d);
std::complex<double> wick_four_point(const Eigen::MatrixXcd& green, int a, int b, int c, int d);

/// Variance of N_A from the amplitudes.
double number_variance(const FockState& state, std::span<const Index> region);

struct LockstepReport {
  std::size_t steps = 0;
  double max_probability_deviation = 0.0;
  double max_green_deviation = 0.0;
  double initial_green_deviation = 0.0;
};

/// Runs the Gaussian engine and the exact simulator side by side from the
/// configured initial state along `schedule`, imposing `outcomes`, and
/// records the largest disagreement of the Born probabilities and of the
/// coordinate Green functions (after every update and after the final
/// evolution to schedule.total_time).
LockstepReport lockstep_compare(const TrajectoryConfig& config,
                                const TrajectorySchedule& schedule,
                                std::span<const std::uint8_t> outcomes, std::uint64_t seed = 0);

struct OracleCheck {
  TrajectorySchedule schedule;
  std::vector<std::uint8_t> outcomes;
  LockstepReport report;
};

/// Draws exactly `n_events` events (uniform sites, sorted uniform times on
/// [0, n_events / (gamma N)]), samples their outcomes with the Gaussian
/// engine under the Born rule, then replays them through lockstep_compare.
OracleCheck oracle_check(const TrajectoryConfig& config, std::size_t n_events,
                         std::uint64_t seed);

}  // namespace mipt::exact
