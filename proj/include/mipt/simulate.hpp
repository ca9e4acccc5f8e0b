#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mipt/observables.hpp"
#include "mipt/run_config.hpp"

namespace mipt {

/// Per-trajectory observable vectors, keyed by accumulator name:
///   correlator_real, correlator_grid, correlator_cut   (correlator)
///   covariance   [G_AB]                               (covariance)
///   mutual_info  [I, G_AB, ratio]                     (mutual_info)
///   entropy      [S(1..L/2), C2(1..L/2), ratio(1..L/2)] (entropy)
using Sample = std::map<std::string, Eigen::VectorXd>;

Sample measure_sample(const RunConfig& config, const Eigen::MatrixXcd& green);

struct FailedTrajectory {
  std::size_t index = 0;
  std::uint64_t seed = 0;
  std::size_t event = 0;
  double time = 0.0;
  std::string message;
};

/// Merge state of a run over its first `completed` trajectories, in
/// trajectory-index order. This is what the manifest persists.
struct RunState {
  std::string config_digest;
  std::size_t completed = 0;
  std::vector<std::uint64_t> seeds;  ///< of the successful trajectories
  std::vector<FailedTrajectory> failed;
  std::map<std::string, RunningStats> stats;
  std::size_t measurements = 0;
  std::size_t clicks = 0;
  std::size_t repurifications = 0;

  /// Folds trajectory `index` into the state; indices must arrive in order.
  void add(std::size_t index, std::uint64_t seed, const Sample& sample,
           std::size_t n_measurements, std::size_t n_clicks, std::size_t n_repurifications);
  void add_failure(FailedTrajectory failure);
};

std::string manifest_json(const RunConfig& config, const RunState& state);
RunState parse_manifest(const std::string& json);

/// Writes the CSV tables of every requested observable into
/// config.output_dir.
void write_run_tables(const RunConfig& config, const RunState& state);

struct SimulateOptions {
  bool resume = false;     ///< continue from an existing manifest
  bool overwrite = false;  ///< discard an existing manifest
  /// Stop once this many trajectories are merged, leaving a resumable run.
  std::optional<std::size_t> stop_after;
  std::function<void(const std::string&)> log;
};

struct SimulateSummary {
  std::filesystem::path output_dir;
  std::size_t completed = 0;
  std::size_t failed = 0;
  bool finished = false;
};

/// Runs config.n_trajectories trajectories on config.n_workers threads.
/// Trajectory i uses trajectory_seed(config, i) and samples are merged in
/// index order, so the outputs are bitwise independent of the worker count
/// and of interruptions followed by resume.
SimulateSummary simulate(const RunConfig& config, const SimulateOptions& options = {});

/// Configuration of sweep cell (gamma, size): the template with those
/// values, base seed derive_seed(template seed, cell_index) and output
/// directory <template dir>/L<size>_gamma<gamma>.
RunConfig sweep_cell_config(const RunConfig& templ, double gamma, int size,
                            std::size_t cell_index);

struct SweepCell {
  int size = 0;
  double gamma = 0.0;
  std::filesystem::path dir;
  bool ok = false;
  std::string error;
  SimulateSummary summary;
};

struct SweepSummary {
  std::vector<SweepCell> cells;
  std::filesystem::path combined;  ///< sweep_covariance.csv
};

/// Runs every (size, gamma) cell; cell index = size index * |gammas| +
/// gamma index. A failing cell is reported and the others still run. The
/// covariance tables of the finished cells are merged into
/// sweep_covariance.csv in the template output directory.
SweepSummary sweep(const RunConfig& templ, std::span<const double> gammas,
                   std::span<const int> sizes, const SimulateOptions& options = {});

}  // namespace mipt
