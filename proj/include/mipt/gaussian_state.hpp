#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>

#include "mipt/lattice.hpp"
#include "mipt/rng.hpp"

namespace mipt {

/// Outcomes whose Born probability is below this are never sampled, and
/// forcing one is an error.
inline constexpr double kClickEpsilon = 1e-12;
/// Born probabilities further than this outside [0, 1] mean the state has
/// lost purity.
inline constexpr double kBornTolerance = 1e-10;

enum class Basis { coordinate, eigen };

/// Every `interval` measurement updates the state is checked against
/// max|G^2 - G| <= tolerance and projected back onto a Slater determinant if
/// it drifted. interval = 0 disables the check.
struct RepurifyPolicy {
  std::size_t interval = 10000;
  double tolerance = 1e-8;
};

/// Site and time of the measurement that will follow the current one. Lets
/// an update prepare the next Born probability during the same sweep.
struct ProbeHint {
  Index site;
  double time;
};

/// Pure fermionic Gaussian state with a fixed particle number, stored as
/// the correlation matrix G~_{ab} = <psi_a^dagger psi_b> in the eigenbasis
/// of the hopping Hamiltonian.
///
/// Free evolution only rotates phases, G~_{ab}(t) = G~_{ab}(0)
/// exp(-i (E_b - E_a) t), so the matrix is kept in a rotating frame and
/// evolution is exact and O(1); the measured plane-wave vector carries the
/// phases instead. Measurements are rank-one projector updates, O(N^2)
/// each, applied to the upper triangle of split real/imaginary planes.
class GaussianState {
 public:
  /// The N_p = round(filling * N) lowest modes filled.
  static GaussianState ground(std::shared_ptr<const Spectrum> spectrum, double filling);
  /// Product state with the given 0/1 occupations in either basis.
  static GaussianState from_pattern(std::shared_ptr<const Spectrum> spectrum, Basis basis,
                                    std::span<const std::uint8_t> occupation);
  /// Uniformly random product state with round(filling * N) particles.
  static GaussianState random_pattern(std::shared_ptr<const Spectrum> spectrum,
                                      Basis basis, double filling, CounterRng& rng);
  /// Any pure state given by its coordinate-basis Green function.
  static GaussianState from_coordinate_green(std::shared_ptr<const Spectrum> spectrum,
                                             const Eigen::MatrixXcd& green,
                                             double time = 0.0);
  static GaussianState from_eigen_green(std::shared_ptr<const Spectrum> spectrum,
                                        const Eigen::MatrixXcd& gtilde, double time = 0.0);

  void evolve(double dt);
  /// Evolves to absolute time t >= time().
  void evolve_to(double t);

  /// Probability n(x) = v^dagger G~ v of finding site x occupied.
  double born_probability(Index site);

  void apply_click(Index site, std::optional<ProbeHint> next = std::nullopt);
  void apply_noclick(Index site, std::optional<ProbeHint> next = std::nullopt);
  void apply_outcome(Index site, bool click, std::optional<ProbeHint> next = std::nullopt);

  /// G~ at the current time.
  Eigen::MatrixXcd gtilde() const;
  /// G = V^dagger G~ V at the current time.
  Eigen::MatrixXcd coordinate_green() const;

  double time() const { return time_; }
  Index n_particles() const { return n_particles_; }
  Index size() const { return n_; }
  const Spectrum& spectrum() const { return *spectrum_; }
  const std::shared_ptr<const Spectrum>& spectrum_ptr() const { return spectrum_; }

  /// |Tr G~ - N_p|.
  double trace_deviation() const;
  /// max_ab |(G~^2 - G~)_ab|.
  double purity_deviation() const;

  /// Projects onto the N_p leading eigenvectors if purity_deviation() exceeds
  /// the policy tolerance. Returns true when a projection happened.
  bool repurify();
  void set_repurify_policy(RepurifyPolicy policy) { policy_ = policy; }
  const RepurifyPolicy& repurify_policy() const { return policy_; }

  std::size_t update_count() const { return updates_; }
  std::size_t repurification_count() const { return repurifications_; }

  /// Little-endian binary dump: "MIPTCKP1", u32 L, u32 d, u64 N_p,
  /// f64 time, u64 rng_cursor, then G~ as N*N row-major (re, im) f64 pairs.
  void save_checkpoint(const std::filesystem::path& path, std::uint64_t rng_cursor) const;
  struct Checkpoint;
  static Checkpoint load_checkpoint(std::shared_ptr<const Spectrum> spectrum,
                                    const std::filesystem::path& path);

 private:
  GaussianState(std::shared_ptr<const Spectrum> spectrum, Index n_particles, double time);

  void set_from_full(const Eigen::MatrixXcd& m);
  Eigen::MatrixXcd frame_matrix() const;
  void plane_wave(Index site, double time, Eigen::VectorXd& re, Eigen::VectorXd& im) const;
  void ensure_probe(Index site);
  void apply_update(Index site, bool click, std::optional<ProbeHint> next);

  struct Probe {
    bool valid = false;
    Index site = -1;
    double time = 0.0;
    Eigen::VectorXd u_re, u_im;  // plane wave in the rotating frame
    Eigen::VectorXd w_re, w_im;  // M u
    double probability = 0.0;
  };

  std::shared_ptr<const Spectrum> spectrum_;
  Index n_ = 0;
  Index n_particles_ = 0;
  double time_ = 0.0;
  double frame_time_ = 0.0;
  // Upper triangle (row <= col) of the rotating-frame matrix M, with
  // G~_{ab}(t) = M_ab exp(i (E_a - E_b)(t - frame_time_)).
  Eigen::MatrixXd re_;
  Eigen::MatrixXd im_;
  Probe probe_;
  Probe next_probe_;
  RepurifyPolicy policy_;
  std::size_t updates_ = 0;
  std::size_t repurifications_ = 0;
};

struct GaussianState::Checkpoint {
  GaussianState state;
  std::uint64_t rng_cursor;
};

}  // namespace mipt
