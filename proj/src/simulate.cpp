#include "mipt/simulate.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <cstdio>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>
#include <variant>

#include "json.hpp"

#include "mipt/errors.hpp"
#include "mipt/rng.hpp"
#include "mipt/tables.hpp"

namespace mipt {

namespace {

using json = nlohmann::json;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

json vector_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (double x : v) {
    if (std::isfinite(x)) {
      a.push_back(x);
    } else {
      a.push_back(nullptr);
    }
  }
  return a;
}

Eigen::VectorXd json_vector(const json& a) {
  Eigen::VectorXd v(static_cast<Index>(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i) {
    v(static_cast<Index>(i)) = a[i].is_null() ? kNaN : a[i].get<double>();
  }
  return v;
}

std::string format_gamma(double g) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", g);
  return buf;
}

Table base_table(const RunConfig& config, const RunState& state) {
  const auto& t = config.trajectory;
  Table table;
  table.set_meta("config_digest", config.digest());
  table.set_meta("family_digest", config.family_digest());
  table.set_meta("dim", std::to_string(t.lattice.dim));
  table.set_meta("size", std::to_string(t.lattice.size));
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", t.lattice.hopping);
  table.set_meta("hopping", buf);
  std::snprintf(buf, sizeof buf, "%.17g", t.gamma);
  table.set_meta("gamma", buf);
  std::snprintf(buf, sizeof buf, "%.17g", t.filling);
  table.set_meta("filling", buf);
  table.set_meta("base_seed", std::to_string(config.base_seed));
  table.set_meta("n_trajectories", std::to_string(state.seeds.size()));
  table.set_meta("n_failed", std::to_string(state.failed.size()));
  return table;
}

const RunningStats& stats_for(const RunState& state, const std::string& key) {
  auto it = state.stats.find(key);
  if (it == state.stats.end() || it->second.count() == 0) {
    throw NumericalDegradation("no successful trajectory contributed to " + key);
  }
  return it->second;
}

// Outcome of one trajectory as handed from a worker to the coordinator.
struct Success {
  std::uint64_t seed;
  Sample sample;
  std::size_t measurements, clicks, repurifications;
};
using Outcome = std::variant<Success, FailedTrajectory, std::exception_ptr>;

Outcome run_one(const RunConfig& config, const std::shared_ptr<const Spectrum>& spectrum,
                std::size_t index) {
  const std::uint64_t seed = trajectory_seed(config, index);
  try {
    TrajectoryResult r = run_trajectory(config.trajectory, spectrum, seed);
    return Success{seed, measure_sample(config, r.green), r.n_measurements, r.n_clicks,
                   r.n_repurifications};
  } catch (const TrajectoryFailure& e) {
    return FailedTrajectory{index, seed, e.event(), e.time(), e.what()};
  } catch (const NumericalDegradation& e) {
    return FailedTrajectory{index, seed, 0, kNaN, e.what()};
  } catch (...) {
    return std::current_exception();
  }
}

}  // namespace

Sample measure_sample(const RunConfig& config, const Eigen::MatrixXcd& green) {
  const LatticeSpec& spec = config.trajectory.lattice;
  Sample s;
  if (config.wants(Observable::correlator)) {
    Eigen::VectorXd c_r = displacement_correlator(spec, green);
    Eigen::VectorXd c_q = momentum_transform(spec, c_r);
    s["correlator_cut"] = axis_cut(spec, c_q);
    s["correlator_real"] = std::move(c_r);
    s["correlator_grid"] = std::move(c_q);
  }
  if (config.wants(Observable::covariance) || config.wants(Observable::mutual_info)) {
    const auto [a, b] = quarter_strips(spec);
    if (config.wants(Observable::covariance)) {
      s["covariance"] = Eigen::VectorXd::Constant(1, covariance(green, a, b));
    }
    if (config.wants(Observable::mutual_info)) {
      const MutualInformation mi = mutual_information(green, a, b);
      s["mutual_info"] = Eigen::Vector3d(mi.value, mi.covariance, mi.ratio);
    }
  }
  if (config.wants(Observable::entropy)) {
    const StripProfile p = strip_profile(spec, green);
    const Index m = static_cast<Index>(p.entropy.size());
    Eigen::VectorXd v(3 * m);
    for (Index i = 0; i < m; ++i) {
      v(i) = p.entropy[static_cast<std::size_t>(i)];
      v(m + i) = p.cumulant2[static_cast<std::size_t>(i)];
      v(2 * m + i) = p.ratio[static_cast<std::size_t>(i)];
    }
    s["entropy"] = std::move(v);
  }
  return s;
}

void RunState::add(std::size_t index, std::uint64_t seed, const Sample& sample,
                   std::size_t n_measurements, std::size_t n_clicks,
                   std::size_t n_repurifications) {
  if (index != completed) throw std::logic_error("RunState::add: out-of-order trajectory");
  for (const auto& [key, v] : sample) stats[key].push(v);
  seeds.push_back(seed);
  measurements += n_measurements;
  clicks += n_clicks;
  repurifications += n_repurifications;
  ++completed;
}

void RunState::add_failure(FailedTrajectory failure) {
  if (failure.index != completed) {
    throw std::logic_error("RunState::add_failure: out-of-order trajectory");
  }
  failed.push_back(std::move(failure));
  ++completed;
}

std::string manifest_json(const RunConfig& config, const RunState& state) {
  json m;
  m["tool"] = "mipt";
  m["version"] = tool_version();
  m["config_digest"] = state.config_digest;
  m["family_digest"] = config.family_digest();
  m["config"] = config.to_text();
  m["n_trajectories"] = config.n_trajectories;
  m["completed"] = state.completed;
  m["finished"] = state.completed >= config.n_trajectories;
  m["seeds"] = state.seeds;
  json failed = json::array();
  for (const auto& f : state.failed) {
    failed.push_back({{"index", f.index},
                      {"seed", f.seed},
                      {"event", f.event},
                      {"time", std::isfinite(f.time) ? json(f.time) : json(nullptr)},
                      {"message", f.message}});
  }
  m["failed"] = failed;
  m["n_failed"] = state.failed.size();
  m["measurements"] = state.measurements;
  m["clicks"] = state.clicks;
  m["repurifications"] = state.repurifications;
  json acc = json::object();
  for (const auto& [key, st] : state.stats) {
    acc[key] = {{"count", st.count()}, {"mean", vector_json(st.mean())}, {"m2", vector_json(st.m2())}};
  }
  m["accumulators"] = acc;
  return m.dump(1) + "\n";
}

RunState parse_manifest(const std::string& text) {
  RunState s;
  try {
    const json m = json::parse(text);
    if (m.at("tool").get<std::string>() != "mipt") throw IoError("manifest: not a mipt manifest");
    s.config_digest = m.at("config_digest").get<std::string>();
    s.completed = m.at("completed").get<std::size_t>();
    s.seeds = m.at("seeds").get<std::vector<std::uint64_t>>();
    for (const auto& f : m.at("failed")) {
      s.failed.push_back({f.at("index").get<std::size_t>(), f.at("seed").get<std::uint64_t>(),
                          f.at("event").get<std::size_t>(),
                          f.at("time").is_null() ? kNaN : f.at("time").get<double>(),
                          f.at("message").get<std::string>()});
    }
    s.measurements = m.at("measurements").get<std::size_t>();
    s.clicks = m.at("clicks").get<std::size_t>();
    s.repurifications = m.at("repurifications").get<std::size_t>();
    for (const auto& [key, a] : m.at("accumulators").items()) {
      s.stats[key] = RunningStats(a.at("count").get<std::size_t>(), json_vector(a.at("mean")),
                                  json_vector(a.at("m2")));
    }
  } catch (const json::exception& e) {
    throw IoError(std::string("manifest: ") + e.what());
  }
  if (s.seeds.size() + s.failed.size() != s.completed) {
    throw IoError("manifest: trajectory counts are inconsistent");
  }
  return s;
}

void write_run_tables(const RunConfig& config, const RunState& state) {
  const LatticeSpec& spec = config.trajectory.lattice;
  const auto& dir = config.output_dir;
  const double gamma = config.trajectory.gamma;

  if (config.wants(Observable::correlator)) {
    const RunningStats& cut = stats_for(state, "correlator_cut");
    Table t = base_table(config, state);
    t.columns = {"m", "q", "q_tilde", "C", "C_err"};
    const Eigen::VectorXd err = cut.std_err();
    for (Index m = 0; m < cut.dim(); ++m) {
      const double q = cut_momentum(spec, static_cast<int>(m));
      t.rows.push_back({static_cast<double>(m), q, q_tilde(q), cut.mean()(m), err(m)});
    }
    write_table(dir / "correlator.csv", t);

    for (const std::string key : {"correlator_real", "correlator_grid"}) {
      const RunningStats& st = stats_for(state, key);
      const Eigen::VectorXd e = st.std_err();
      Table g = base_table(config, state);
      const std::string prefix = key == "correlator_real" ? "r" : "m";
      for (int i = 0; i < spec.dim; ++i) g.columns.push_back(prefix + std::to_string(i));
      g.columns.push_back("C");
      g.columns.push_back("C_err");
      for (Index k = 0; k < st.dim(); ++k) {
        std::vector<double> row;
        for (int c : spec.coords(k)) row.push_back(c);
        row.push_back(st.mean()(k));
        row.push_back(e(k));
        g.rows.push_back(std::move(row));
      }
      write_table(dir / (key + ".csv"), g);
    }
  }

  if (config.wants(Observable::covariance)) {
    const RunningStats& st = stats_for(state, "covariance");
    Table t = base_table(config, state);
    t.columns = {"L", "gamma", "G_AB", "G_AB_err"};
    t.rows.push_back({static_cast<double>(spec.size), gamma, st.mean()(0), st.std_err()(0)});
    write_table(dir / "covariance.csv", t);
  }

  if (config.wants(Observable::mutual_info)) {
    const RunningStats& st = stats_for(state, "mutual_info");
    const Eigen::VectorXd e = st.std_err();
    Table t = base_table(config, state);
    t.columns = {"L", "gamma", "I", "I_err", "G_AB", "G_AB_err", "ratio", "ratio_err"};
    t.rows.push_back({static_cast<double>(spec.size), gamma, st.mean()(0), e(0), st.mean()(1),
                      e(1), st.mean()(2), e(2)});
    write_table(dir / "mutual_info.csv", t);
  }

  if (config.wants(Observable::entropy)) {
    const RunningStats& st = stats_for(state, "entropy");
    const Eigen::VectorXd e = st.std_err();
    const Index m = st.dim() / 3;
    Table t = base_table(config, state);
    t.columns = {"ell", "ell_tilde", "S", "S_err", "C2", "C2_err", "ratio", "ratio_err"};
    for (Index i = 0; i < m; ++i) {
      const double ell = static_cast<double>(i + 1);
      t.rows.push_back({ell, chord_length(spec.size, ell), st.mean()(i), e(i),
                        st.mean()(m + i), e(m + i), st.mean()(2 * m + i), e(2 * m + i)});
    }
    write_table(dir / "entropy.csv", t);
  }
}

SimulateSummary simulate(const RunConfig& config, const SimulateOptions& options) {
  config.validate();
  auto log = [&](const std::string& msg) {
    if (options.log) options.log(msg);
  };
  const auto& dir = config.output_dir;
  const auto manifest_path = dir / "manifest.json";
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());

  RunState state;
  state.config_digest = config.digest();
  if (std::filesystem::exists(manifest_path)) {
    if (options.resume) {
      state = parse_manifest(read_file(manifest_path));
      if (state.config_digest != config.digest()) {
        throw InvalidInput("resume: manifest in " + dir.string() +
                           " belongs to a different configuration (digest " +
                           state.config_digest + ")");
      }
      log("resuming at trajectory " + std::to_string(state.completed));
    } else if (!options.overwrite) {
      throw IoError(manifest_path.string() + " exists; pass --resume or --force");
    }
  }

  std::size_t end = config.n_trajectories;
  if (options.stop_after) end = std::min(end, std::max(*options.stop_after, state.completed));

  auto spectrum = std::make_shared<const Spectrum>(build_spectrum(config.trajectory.lattice));
  auto flush = [&] { write_file_atomic(manifest_path, manifest_json(config, state)); };

  auto merge = [&](std::size_t index, Outcome&& outcome) {
    if (auto* err = std::get_if<std::exception_ptr>(&outcome)) std::rethrow_exception(*err);
    if (auto* f = std::get_if<FailedTrajectory>(&outcome)) {
      log("trajectory " + std::to_string(index) + " failed: " + f->message);
      state.add_failure(std::move(*f));
    } else {
      auto& s = std::get<Success>(outcome);
      state.add(index, s.seed, s.sample, s.measurements, s.clicks, s.repurifications);
    }
  };

  using clock = std::chrono::steady_clock;
  auto last_flush = clock::now();
  auto maybe_flush = [&] {
    if (clock::now() - last_flush > std::chrono::seconds(10)) {
      flush();
      last_flush = clock::now();
    }
  };

  const std::size_t start = state.completed;
  if (config.n_workers <= 1 || end - std::min(end, start) <= 1) {
    for (std::size_t i = start; i < end; ++i) {
      merge(i, run_one(config, spectrum, i));
      log("trajectory " + std::to_string(i + 1) + "/" + std::to_string(config.n_trajectories));
      maybe_flush();
    }
  } else {
    // Workers claim indices in order; the coordinator merges them in order,
    // keeping at most `window` finished samples buffered.
    std::mutex mu;
    std::condition_variable cv;
    std::map<std::size_t, Outcome> ready;
    std::size_t next = start;
    std::size_t merged = start;
    bool stop = false;
    const std::size_t window = 2 * static_cast<std::size_t>(config.n_workers);

    auto worker = [&] {
      for (;;) {
        std::size_t index;
        {
          std::unique_lock lock(mu);
          cv.wait(lock, [&] { return stop || (next < end && next < merged + window); });
          if (stop) return;
          index = next++;
        }
        Outcome o = run_one(config, spectrum, index);
        {
          std::lock_guard lock(mu);
          ready.emplace(index, std::move(o));
        }
        cv.notify_all();
      }
    };
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < config.n_workers; ++w) pool.emplace_back(worker);

    std::exception_ptr failure;
    while (merged < end) {
      Outcome o;
      {
        std::unique_lock lock(mu);
        cv.wait(lock, [&] { return ready.count(merged) > 0; });
        o = std::move(ready.at(merged));
        ready.erase(merged);
      }
      try {
        merge(merged, std::move(o));
      } catch (...) {
        failure = std::current_exception();
      }
      {
        std::lock_guard lock(mu);
        ++merged;
        if (failure) stop = true;
      }
      cv.notify_all();
      if (failure) break;
      log("trajectory " + std::to_string(merged) + "/" + std::to_string(config.n_trajectories));
      maybe_flush();
    }
    {
      std::lock_guard lock(mu);
      stop = true;
    }
    cv.notify_all();
    pool.clear();
    if (failure) std::rethrow_exception(failure);
  }

  flush();
  SimulateSummary summary;
  summary.output_dir = dir;
  summary.completed = state.completed;
  summary.failed = state.failed.size();
  summary.finished = state.completed >= config.n_trajectories;
  if (!state.seeds.empty()) write_run_tables(config, state);
  return summary;
}

RunConfig sweep_cell_config(const RunConfig& templ, double gamma, int size,
                            std::size_t cell_index) {
  RunConfig c = templ;
  c.trajectory.gamma = gamma;
  c.trajectory.lattice.size = size;
  c.base_seed = derive_seed(templ.base_seed, cell_index);
  c.output_dir = templ.output_dir / ("L" + std::to_string(size) + "_gamma" + format_gamma(gamma));
  return c;
}

SweepSummary sweep(const RunConfig& templ, std::span<const double> gammas,
                   std::span<const int> sizes, const SimulateOptions& options) {
  if (gammas.empty() || sizes.empty()) throw InvalidInput("sweep: empty gamma or size list");
  if (!templ.wants(Observable::covariance)) {
    throw InvalidInput("sweep: the template must request the covariance observable");
  }
  SweepSummary summary;
  std::size_t cell_index = 0;
  for (int size : sizes) {
    for (double gamma : gammas) {
      SweepCell cell;
      cell.size = size;
      cell.gamma = gamma;
      const RunConfig c = sweep_cell_config(templ, gamma, size, cell_index++);
      cell.dir = c.output_dir;
      try {
        c.validate();
        SimulateOptions o = options;
        if (options.resume && !std::filesystem::exists(c.output_dir / "manifest.json")) {
          o.resume = false;
        }
        std::filesystem::create_directories(c.output_dir);
        write_file_atomic(c.output_dir / "config.txt", c.to_text());
        cell.summary = simulate(c, o);
        cell.ok = cell.summary.completed > cell.summary.failed;
      } catch (const std::exception& e) {
        cell.error = e.what();
      }
      if (options.log) {
        options.log("cell L=" + std::to_string(size) + " gamma=" + format_gamma(gamma) + ": " +
                    (cell.ok ? "ok" : "failed " + cell.error));
      }
      summary.cells.push_back(std::move(cell));
    }
  }

  Table combined;
  combined.set_meta("config_digest", templ.digest());
  combined.set_meta("family_digest", templ.family_digest());
  combined.columns = {"L", "gamma", "G_AB", "G_AB_err", "n_trajectories"};
  for (const auto& cell : summary.cells) {
    if (!cell.ok || !std::filesystem::exists(cell.dir / "covariance.csv")) continue;
    const Table t = read_table(cell.dir / "covariance.csv");
    const double n = std::stod(t.get_meta("n_trajectories").value_or("0"));
    for (const auto& row : t.rows) combined.rows.push_back({row[0], row[1], row[2], row[3], n});
  }
  std::sort(combined.rows.begin(), combined.rows.end());
  summary.combined = templ.output_dir / "sweep_covariance.csv";
  std::filesystem::create_directories(templ.output_dir);
  write_table(summary.combined, combined);
  return summary;
}

}  // namespace mipt
