#include "doctest.h"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <numbers>
#include <string>
#include <sys/wait.h>

#include "mipt/analyze.hpp"
#include "mipt/errors.hpp"
#include "mipt/run_config.hpp"
#include "mipt/simulate.hpp"
#include "mipt/tables.hpp"

using namespace mipt;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() /
           ("mipt_test_" + tag + "_" + std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

RunConfig small_run(const fs::path& out) {
  RunConfig c;
  c.trajectory.lattice.dim = 2;
  c.trajectory.lattice.size = 4;
  c.trajectory.gamma = 1.5;
  c.trajectory.total_time = 3.0;
  c.n_trajectories = 6;
  c.base_seed = 17;
  c.observables = {Observable::correlator, Observable::covariance, Observable::entropy};
  c.output_dir = out;
  return c;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(MIPT_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("config text parsing") {
  const auto c = parse_run_config("# comment\ndim = 1\nsize = 10\ngamma = 0.25\n"
                                  "total_time = auto\nobservables = entropy, covariance\n");
  CHECK(c.trajectory.lattice.dim == 1);
  CHECK(c.trajectory.gamma == 0.25);
  CHECK_FALSE(c.trajectory.total_time);
  CHECK(c.wants(Observable::entropy));
  CHECK_FALSE(c.wants(Observable::correlator));
  CHECK_THROWS_AS(parse_run_config("gamma = 1\ngamma = 2\n"), InvalidInput);
  CHECK_THROWS_AS(parse_run_config("gama = 1\n"), InvalidInput);
  CHECK_THROWS_AS(parse_run_config("gamma = fast\n"), InvalidInput);

  // Round trip through the full text form.
  const auto again = parse_run_config(c.to_text());
  CHECK(again.digest() == c.digest());
  CHECK(again.to_text() == c.to_text());
}

TEST_CASE("digests ignore bookkeeping fields") {
  auto a = small_run("x");
  auto b = a;
  b.n_workers = 4;
  b.n_trajectories = 1000;
  b.output_dir = "elsewhere";
  CHECK(a.digest() == b.digest());
  b.trajectory.gamma = 2.0;
  b.trajectory.lattice.size = 8;
  b.base_seed = 3;
  CHECK(a.digest() != b.digest());
  CHECK(a.family_digest() == b.family_digest());
  b.trajectory.filling = 0.25;
  CHECK(a.family_digest() != b.family_digest());
  CHECK(trajectory_seed(a, 0) != trajectory_seed(a, 1));
}

TEST_CASE("tables round trip, including nan") {
  TempDir tmp("table");
  Table t;
  t.set_meta("config_digest", "00ff");
  t.set_meta("note", "x");
  t.columns = {"a", "b"};
  t.rows = {{1.0 / 3.0, std::nan("")}, {-2e-300, 5.0}};
  write_table(tmp.path / "t.csv", t);
  const Table r = read_table(tmp.path / "t.csv");
  CHECK(r.columns == t.columns);
  CHECK(r.get_meta("note") == "x");
  CHECK(r.get_meta("config_digest") == "00ff");
  CHECK(r.rows[0][0] == t.rows[0][0]);
  CHECK(std::isnan(r.rows[0][1]));
  CHECK(r.rows[1][0] == t.rows[1][0]);
  CHECK_THROWS_AS(r.column_index("c"), IoError);
  CHECK_THROWS_AS(read_table(tmp.path / "missing.csv"), IoError);
}

TEST_CASE("simulate is independent of workers and interruptions") {
  TempDir tmp("sim");
  auto one = small_run(tmp.path / "one");
  simulate(one);
  auto many = small_run(tmp.path / "many");
  many.n_workers = 3;
  simulate(many);
  auto split = small_run(tmp.path / "split");
  SimulateOptions stop;
  stop.stop_after = 2;
  const auto partial = simulate(split, stop);
  CHECK_FALSE(partial.finished);
  CHECK(partial.completed == 2);
  CHECK_THROWS_AS(simulate(split), IoError);  // refuses to clobber without resume
  SimulateOptions resume;
  resume.resume = true;
  const auto done = simulate(split, resume);
  CHECK(done.finished);
  CHECK(done.completed == 6);

  for (const char* name : {"correlator.csv", "covariance.csv", "entropy.csv"}) {
    CAPTURE(name);
    const std::string ref = read_file(tmp.path / "one" / name);
    CHECK(read_file(tmp.path / "many" / name) == ref);
    CHECK(read_file(tmp.path / "split" / name) == ref);
  }
  const Table cov = read_table(tmp.path / "one" / "covariance.csv");
  CHECK(cov.get_meta("config_digest") == one.digest());
  CHECK(cov.get_meta("n_trajectories") == "6");
}

TEST_CASE("sweep cells: distinct seeds, one row per cell, equal to a plain run") {
  TempDir tmp("sweep");
  auto templ = small_run(tmp.path / "sweep");
  templ.n_trajectories = 3;
  templ.observables = {Observable::covariance};
  const std::vector<double> gammas{1.0, 2.0};
  const std::vector<int> sizes{4, 8};
  const auto s = sweep(templ, gammas, sizes);
  REQUIRE(s.cells.size() == 4);
  for (const auto& c : s.cells) CHECK(c.ok);
  const auto c01 = sweep_cell_config(templ, 2.0, 4, 1);
  const auto c10 = sweep_cell_config(templ, 1.0, 8, 2);
  CHECK(c01.base_seed != c10.base_seed);
  CHECK(c01.base_seed != templ.base_seed);
  const Table combined = read_table(s.combined);
  CHECK(combined.rows.size() == 4);
  CHECK(combined.get_meta("config_digest") == templ.digest());

  // The same cell run on its own reproduces the sweep output.
  auto alone = c01;
  alone.output_dir = tmp.path / "alone";
  simulate(alone);
  CHECK(read_table(alone.output_dir / "covariance.csv").rows ==
        read_table(c01.output_dir / "covariance.csv").rows);
}

TEST_CASE("analyze tables") {
  TempDir tmp("analyze");
  auto c = small_run(tmp.path / "run");
  simulate(c);

  const auto mom = analyze({c.output_dir}, AnalyzeMode::momentum, false);
  const Table& t = mom.tables.at("momentum.csv");
  const auto q = t.column("q");
  const auto qt = t.column("q_tilde");
  for (std::size_t i = 0; i < q.size(); ++i) CHECK(qt[i] == doctest::Approx(2.0 * std::sin(q[i] / 2)));
  // Only two non-zero momenta at L = 4: no intercept.
  CHECK(std::isnan(mom.tables.at("momentum_intercept.csv").rows[0][3]));

  const auto ent = analyze({c.output_dir}, AnalyzeMode::entropy, false);
  const Table& e = ent.tables.at("entropy_profile.csv");
  const auto ell = e.column("ell");
  const auto lt = e.column("ell_tilde");
  for (std::size_t i = 0; i < ell.size(); ++i) {
    CHECK(lt[i] == doctest::Approx(4.0 / std::numbers::pi * std::sin(std::numbers::pi * ell[i] / 4.0)));
  }

  auto other = small_run(tmp.path / "other");
  other.trajectory.filling = 0.25;
  simulate(other);
  CHECK_THROWS_AS(analyze({c.output_dir, other.output_dir}, AnalyzeMode::covariance, false),
                  InvalidInput);
  CHECK_THROWS_AS(analyze({c.output_dir, c.output_dir}, AnalyzeMode::covariance, false),
                  InvalidInput);
  const auto forced = analyze({c.output_dir, other.output_dir}, AnalyzeMode::covariance, true);
  CHECK(forced.tables.at("covariance_dataset.csv").rows.size() == 2);
  CHECK_THROWS_AS(parse_analyze_mode("spectral"), InvalidInput);
}

TEST_CASE("command-line exit codes") {
  if (std::string(MIPT_CLI_PATH).empty()) return;
  TempDir tmp("cli");
  CHECK(run_cli("--print-config") == 0);
  CHECK(run_cli("no-such-command") == 1);
  CHECK(run_cli("simulate --config " + (tmp.path / "missing.cfg").string()) == 3);
  CHECK(run_cli("theory --table critical --dim 1") == 2);
  CHECK(run_cli("theory --table rg --dim 2 --out " + (tmp.path / "rg.csv").string()) == 0);
  CHECK(fs::exists(tmp.path / "rg.csv"));
  CHECK(run_cli("oracle-check --dim 2 --size 2 --events 50 --seed 3") == 0);
  CHECK(run_cli("oracle-check --dim 2 --size 4") == 1);
  CHECK(run_cli("analyze --mode bogus " + tmp.path.string()) == 1);
}
