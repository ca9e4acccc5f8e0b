#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mipt/errors.hpp"
#include "mipt/gaussian_state.hpp"
#include "mipt/lattice.hpp"
#include "mipt/rng.hpp"

namespace mipt {

enum class InitialState { ground, coordinate_bitstring, eigen_bitstring };

std::string to_string(InitialState kind);
InitialState parse_initial_state(const std::string& text);

struct TrajectoryConfig {
  LatticeSpec lattice;
  double gamma = 1.0;    ///< measurement rate per site, in units of J
  double filling = 0.5;
  std::optional<double> total_time;  ///< unset: steady_state_time()
  InitialState initial = InitialState::ground;
  double burn_measurements = 20.0;  ///< measurements per site before sampling
  double burn_traversals = 4.0;     ///< ballistic crossings of the system
  bool record_outcomes = false;
  RepurifyPolicy repurify;

  void validate() const;
  /// Canonical key=value text of every field that affects the result.
  std::string canonical_text() const;
  /// FNV-1a 64 of canonical_text(), as 16 hex digits.
  std::string digest() const;
};

struct MeasurementEvent {
  double time;
  Index site;
};

struct TrajectorySchedule {
  std::vector<MeasurementEvent> events;  ///< ascending in time, stable for ties
  double total_time = 0.0;
};

/// M ~ Poisson(gamma N T) measurements at i.i.d. uniform times in [0, T]
/// on uniformly chosen sites, sorted by time.
TrajectorySchedule sample_schedule(double gamma, double total_time, Index n_sites,
                                   CounterRng& rng);

/// T = max(burn_measurements / gamma, burn_traversals * L / v0), or the
/// configured total_time when set.
double steady_state_time(const TrajectoryConfig& config);

struct TrajectoryResult {
  Eigen::MatrixXcd green;  ///< coordinate Green function at t = T
  std::optional<std::vector<std::uint8_t>> outcomes;
  std::uint64_t seed = 0;
  std::string config_digest;
  std::size_t n_measurements = 0;
  std::size_t n_clicks = 0;
  std::size_t n_repurifications = 0;
  double total_time = 0.0;
};

/// Numerical failure inside a trajectory, tagged with where it happened.
class TrajectoryFailure : public NumericalDegradation {
 public:
  TrajectoryFailure(const std::string& what, std::uint64_t seed, std::size_t event,
                    double time)
      : NumericalDegradation(what), seed_(seed), event_(event), time_(time) {}
  std::uint64_t seed() const { return seed_; }
  std::size_t event() const { return event_; }
  double time() const { return time_; }

 private:
  std::uint64_t seed_;
  std::size_t event_;
  double time_;
};

/// Called after every measurement with the event index, the event, its
/// outcome and the post-measurement state.
using StepObserver =
    std::function<void(std::size_t, const MeasurementEvent&, bool, const GaussianState&)>;

GaussianState initial_state(const TrajectoryConfig& config,
                            std::shared_ptr<const Spectrum> spectrum, std::uint64_t seed);

/// Runs the measurement protocol along a fixed schedule. Outcomes are drawn
/// from the Born rule (u ~ U[0,1), click iff u < p) unless `forced` supplies
/// them.
TrajectoryResult run_schedule(const TrajectoryConfig& config, GaussianState& state,
                              const TrajectorySchedule& schedule, std::uint64_t seed,
                              const std::vector<std::uint8_t>* forced = nullptr,
                              const StepObserver& observer = {});

/// One full trajectory: initial state, sampled schedule, Born-rule outcomes,
/// final evolution to T. Identical (seed, config) give identical results.
TrajectoryResult run_trajectory(const TrajectoryConfig& config,
                                std::shared_ptr<const Spectrum> spectrum, std::uint64_t seed,
                                const StepObserver& observer = {});
TrajectoryResult run_trajectory(const TrajectoryConfig& config, std::uint64_t seed);

/// FNV-1a 64 of `text` as 16 hex digits.
std::string fnv1a_hex(const std::string& text);

}  // namespace mipt
