#include "mipt/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace mipt {

std::string to_string(InitialState kind) {
  switch (kind) {
    case InitialState::ground: return "ground";
    case InitialState::coordinate_bitstring: return "coordinate_bitstring";
    case InitialState::eigen_bitstring: return "eigen_bitstring";
  }
  return "ground";
}

InitialState parse_initial_state(const std::string& text) {
  if (text == "ground") return InitialState::ground;
  if (text == "coordinate_bitstring") return InitialState::coordinate_bitstring;
  if (text == "eigen_bitstring") return InitialState::eigen_bitstring;
  throw InvalidInput("unknown initial_state '" + text + "'");
}

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void TrajectoryConfig::validate() const {
  lattice.validate();
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) throw InvalidInput("gamma must be >= 0");
  if (!(filling >= 0.0 && filling <= 1.0)) throw InvalidInput("filling must lie in [0, 1]");
  if (total_time && !(*total_time > 0.0 && std::isfinite(*total_time))) {
    throw InvalidInput("total_time must be > 0");
  }
  if (!(burn_measurements >= 0.0) || !(burn_traversals >= 0.0)) {
    throw InvalidInput("burn-in constants must be >= 0");
  }
}

std::string TrajectoryConfig::canonical_text() const {
  std::ostringstream os;
  os.precision(17);
  os << "dim=" << lattice.dim << "\nsize=" << lattice.size << "\nhopping=" << lattice.hopping
     << "\ngamma=" << gamma << "\nfilling=" << filling << "\ntotal_time=";
  if (total_time) {
    os << *total_time;
  } else {
    os << "auto";
  }
  os << "\ninitial_state=" << to_string(initial) << "\nburn_measurements=" << burn_measurements
     << "\nburn_traversals=" << burn_traversals << "\nrepurify_interval=" << repurify.interval
     << "\nrepurify_tolerance=" << repurify.tolerance << "\n";
  return os.str();
}

std::string TrajectoryConfig::digest() const { return fnv1a_hex(canonical_text()); }

TrajectorySchedule sample_schedule(double gamma, double total_time, Index n_sites,
                                   CounterRng& rng) {
  if (!(gamma >= 0.0)) throw InvalidInput("sample_schedule: gamma must be >= 0");
  if (!(total_time > 0.0)) throw InvalidInput("sample_schedule: total time must be > 0");
  if (n_sites < 1) throw InvalidInput("sample_schedule: no sites");
  TrajectorySchedule s;
  s.total_time = total_time;
  const std::uint64_t m = rng.poisson(gamma * static_cast<double>(n_sites) * total_time);
  s.events.resize(m);
  for (auto& e : s.events) e.time = rng.uniform() * total_time;
  for (auto& e : s.events) e.site = static_cast<Index>(rng.below(static_cast<std::uint64_t>(n_sites)));
  std::stable_sort(s.events.begin(), s.events.end(),
                   [](const MeasurementEvent& a, const MeasurementEvent& b) {
                     return a.time < b.time;
                   });
  return s;
}

double steady_state_time(const TrajectoryConfig& config) {
  if (config.total_time) return *config.total_time;
  const double ballistic =
      config.burn_traversals * config.lattice.size / velocity_scales(config.lattice).v0;
  if (config.gamma <= 0.0) return ballistic;
  return std::max(config.burn_measurements / config.gamma, ballistic);
}

GaussianState initial_state(const TrajectoryConfig& config,
                            std::shared_ptr<const Spectrum> spectrum, std::uint64_t seed) {
  GaussianState state = [&] {
    switch (config.initial) {
      case InitialState::coordinate_bitstring: {
        CounterRng rng(seed, Stream::initial_state);
        return GaussianState::random_pattern(std::move(spectrum), Basis::coordinate,
                                             config.filling, rng);
      }
      case InitialState::eigen_bitstring: {
        CounterRng rng(seed, Stream::initial_state);
        return GaussianState::random_pattern(std::move(spectrum), Basis::eigen,
                                             config.filling, rng);
      }
      case InitialState::ground:
      default: return GaussianState::ground(std::move(spectrum), config.filling);
    }
  }();
  state.set_repurify_policy(config.repurify);
  return state;
}

TrajectoryResult run_schedule(const TrajectoryConfig& config, GaussianState& state,
                              const TrajectorySchedule& schedule, std::uint64_t seed,
                              const std::vector<std::uint8_t>* forced,
                              const StepObserver& observer) {
  if (forced && forced->size() != schedule.events.size()) {
    throw InvalidInput("run_schedule: forced outcome count differs from event count");
  }
  CounterRng outcome_rng(seed, Stream::outcomes);
  TrajectoryResult result;
  result.seed = seed;
  result.config_digest = config.digest();
  result.total_time = schedule.total_time;
  if (config.record_outcomes || forced) result.outcomes.emplace();
  const auto& events = schedule.events;
  const std::size_t repurified_before = state.repurification_count();

  for (std::size_t k = 0; k < events.size(); ++k) {
    const auto& ev = events[k];
    try {
      state.evolve_to(std::max(ev.time, state.time()));
      const double p = state.born_probability(ev.site);
      bool click;
      if (forced) {
        click = (*forced)[k] != 0;
      } else {
        // Outcomes within kClickEpsilon of impossible are never drawn.
        const double u = outcome_rng.uniform();
        click = u < p;
        if (click && p <= kClickEpsilon) click = false;
        if (!click && 1.0 - p <= kClickEpsilon) click = true;
      }
      std::optional<ProbeHint> next;
      if (k + 1 < events.size()) {
        next = ProbeHint{events[k + 1].site, std::max(events[k + 1].time, state.time())};
      }
      state.apply_outcome(ev.site, click, next);
      if (result.outcomes) result.outcomes->push_back(click ? 1 : 0);
      result.n_clicks += click ? 1 : 0;
      if (observer) observer(k, ev, click, state);
    } catch (const NumericalDegradation& err) {
      throw TrajectoryFailure(std::string(err.what()) + " (seed " + std::to_string(seed) +
                                  ", event " + std::to_string(k) + ")",
                              seed, k, ev.time);
    }
  }
  state.evolve_to(std::max(schedule.total_time, state.time()));
  result.n_measurements = events.size();
  result.n_repurifications = state.repurification_count() - repurified_before;
  result.green = state.coordinate_green();
  return result;
}

TrajectoryResult run_trajectory(const TrajectoryConfig& config,
                                std::shared_ptr<const Spectrum> spectrum, std::uint64_t seed,
                                const StepObserver& observer) {
  config.validate();
  if (!spectrum || !(spectrum->lattice == config.lattice)) {
    throw InvalidInput("run_trajectory: spectrum does not match the configured lattice");
  }
  const double total = steady_state_time(config);
  CounterRng schedule_rng(seed, Stream::schedule);
  const TrajectorySchedule schedule =
      sample_schedule(config.gamma, total, spectrum->size(), schedule_rng);
  GaussianState state = initial_state(config, spectrum, seed);
  return run_schedule(config, state, schedule, seed, nullptr, observer);
}

TrajectoryResult run_trajectory(const TrajectoryConfig& config, std::uint64_t seed) {
  config.validate();
  auto spectrum = std::make_shared<const Spectrum>(build_spectrum(config.lattice));
  return run_trajectory(config, std::move(spectrum), seed);
}

}  // namespace mipt
