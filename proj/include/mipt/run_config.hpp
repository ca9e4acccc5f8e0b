#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "mipt/trajectory.hpp"

namespace mipt {

/// Observables a run can accumulate.
enum class Observable { correlator, covariance, mutual_info, entropy };

std::string to_string(Observable o);
Observable parse_observable(const std::string& text);

/// Everything `simulate` needs. Serialized as flat `key = value` lines;
/// `#` starts a comment. Keys:
///
///   dim, size, hopping                 lattice (J = hopping)
///   gamma, filling, total_time         protocol; total_time = auto picks
///                                      the steady-state time
///   initial_state                      ground | coordinate_bitstring |
///                                      eigen_bitstring
///   burn_measurements, burn_traversals constants of the automatic time
///   repurify_interval, repurify_tolerance
///   record_outcomes                    true | false
///   n_trajectories, base_seed, n_workers
///   observables                        comma list of correlator,
///                                      covariance, mutual_info, entropy
///   output_dir
struct RunConfig {
  TrajectoryConfig trajectory;
  std::size_t n_trajectories = 100;
  std::uint64_t base_seed = 1;
  unsigned n_workers = 1;
  std::vector<Observable> observables = {Observable::correlator, Observable::covariance};
  std::filesystem::path output_dir = "mipt-run";

  void validate() const;
  bool wants(Observable o) const;

  /// Full key = value text, every key present.
  std::string to_text() const;
  /// Hash of everything that determines the per-trajectory results:
  /// the trajectory settings, the observables and the base seed. Trajectory
  /// count, worker count and output directory are excluded, so a run can be
  /// extended or resumed with different values.
  std::string digest() const;
  /// Same, without gamma, size and base seed: shared by the cells of a sweep.
  std::string family_digest() const;
};

RunConfig parse_run_config(const std::string& text);
RunConfig load_run_config(const std::filesystem::path& path);

/// Seed of trajectory `index` of a run.
std::uint64_t trajectory_seed(const RunConfig& config, std::size_t index);

}  // namespace mipt
