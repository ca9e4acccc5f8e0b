#include "doctest.h"

#include <cmath>
#include <numbers>

#include "mipt/errors.hpp"
#include "mipt/exact_oracle.hpp"
#include "mipt/trajectory.hpp"

using namespace mipt;

namespace {

TrajectoryConfig config(int d, int L, double gamma) {
  TrajectoryConfig c;
  c.lattice.dim = d;
  c.lattice.size = L;
  c.gamma = gamma;
  return c;
}

}  // namespace

TEST_CASE("schedule: empty at gamma = 0, sorted, reproducible") {
  CounterRng rng(1, Stream::schedule);
  CHECK(sample_schedule(0.0, 10.0, 100, rng).events.empty());

  CounterRng a(9, Stream::schedule);
  CounterRng b(9, Stream::schedule);
  const auto s1 = sample_schedule(1.0, 5.0, 64, a);
  const auto s2 = sample_schedule(1.0, 5.0, 64, b);
  REQUIRE(s1.events.size() == s2.events.size());
  for (std::size_t i = 0; i < s1.events.size(); ++i) {
    CHECK(s1.events[i].time == s2.events[i].time);
    CHECK(s1.events[i].site == s2.events[i].site);
    CHECK(s1.events[i].time >= 0.0);
    CHECK(s1.events[i].time <= 5.0);
    CHECK(s1.events[i].site < 64);
    if (i) CHECK(s1.events[i - 1].time <= s1.events[i].time);
  }
  CHECK(s1.total_time == 5.0);
}

TEST_CASE("schedule size is Poisson with mean gamma N T") {
  CounterRng rng(33, Stream::schedule);
  double sum = 0.0;
  for (int i = 0; i < 1000; ++i) {
    sum += static_cast<double>(sample_schedule(1.0, 10.0, 100, rng).events.size());
  }
  CHECK(std::abs(sum / 1000.0 - 1000.0) < 5.0 * std::sqrt(1000.0));
}

TEST_CASE("steady-state time") {
  auto c = config(2, 16, 1.0);
  CHECK(steady_state_time(c) == doctest::Approx(4.0 * 16.0 / std::numbers::sqrt2));
  c.gamma = 0.1;
  CHECK(steady_state_time(c) == doctest::Approx(200.0));
  c.total_time = 7.5;
  CHECK(steady_state_time(c) == 7.5);
}

TEST_CASE("gamma = 0 leaves the ground state untouched") {
  auto c = config(2, 6, 0.0);
  c.total_time = 10.0;
  const auto r = run_trajectory(c, 5);
  CHECK(r.n_measurements == 0);
  auto sp = std::make_shared<const Spectrum>(build_spectrum(c.lattice));
  const auto g0 = GaussianState::ground(sp, 0.5).coordinate_green();
  CHECK((r.green - g0).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("identical seeds give bitwise identical trajectories") {
  auto c = config(2, 6, 1.0);
  c.record_outcomes = true;
  const auto a = run_trajectory(c, 77);
  const auto b = run_trajectory(c, 77);
  const auto other = run_trajectory(c, 78);
  REQUIRE(a.outcomes);
  CHECK(*a.outcomes == *b.outcomes);
  CHECK(a.green == b.green);
  CHECK(a.config_digest == c.digest());
  CHECK(a.green != other.green);
  CHECK(a.n_clicks <= a.n_measurements);
}

TEST_CASE("forced click on two sites matches the exact oracle") {
  auto c = config(1, 2, 1.0);
  c.initial = InitialState::coordinate_bitstring;
  TrajectorySchedule s;
  s.events = {{0.3, 1}};
  s.total_time = 1.0;
  // A single particle in the coordinate-bitstring state; pick the outcome
  // with non-zero probability.
  auto sp = std::make_shared<const Spectrum>(build_spectrum(c.lattice));
  GaussianState probe = initial_state(c, sp, 3);
  probe.evolve_to(0.3);
  const std::uint8_t outcome = probe.born_probability(1) > 0.5 ? 1 : 0;
  const std::vector<std::uint8_t> forced{outcome};
  const auto report = exact::lockstep_compare(c, s, forced, 3);
  CHECK(report.steps == 1);
  CHECK(report.max_probability_deviation < 1e-12);
  CHECK(report.max_green_deviation < 1e-12);
}

TEST_CASE("mean density equals the filling on two seeds") {
  auto c = config(2, 8, 1.0);
  for (std::uint64_t seed : {1u, 2u}) {
    const auto r = run_trajectory(c, seed);
    const double mean = r.green.diagonal().real().mean();
    CHECK(std::abs(mean - 0.5) < 1e-10);
  }
}

TEST_CASE("observer sees every event and failures carry metadata") {
  auto c = config(2, 4, 2.0);
  std::size_t seen = 0;
  auto sp = std::make_shared<const Spectrum>(build_spectrum(c.lattice));
  const auto r = run_trajectory(c, sp, 11,
                                [&](std::size_t k, const MeasurementEvent&, bool,
                                    const GaussianState& st) {
                                  CHECK(k == seen);
                                  CHECK(st.trace_deviation() < 1e-8);
                                  ++seen;
                                });
  CHECK(seen == r.n_measurements);

  TrajectoryFailure f("boom", 1, 2, 3.0);
  CHECK(f.seed() == 1);
  CHECK(f.event() == 2);
  CHECK(f.time() == 3.0);
}

TEST_CASE("config validation and digest") {
  auto c = config(2, 8, 1.0);
  const auto d = c.digest();
  CHECK(d.size() == 16);
  c.gamma = 1.5;
  CHECK(c.digest() != d);
  c.gamma = -1.0;
  CHECK_THROWS_AS(c.validate(), InvalidInput);
  CHECK(parse_initial_state("eigen_bitstring") == InitialState::eigen_bitstring);
  CHECK_THROWS_AS(parse_initial_state("warm"), InvalidInput);
}
