// mipt: command-line front end. See README.md for the subcommands.

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "mipt/analyze.hpp"
#include "mipt/collapse.hpp"
#include "mipt/errors.hpp"
#include "mipt/exact_oracle.hpp"
#include "mipt/run_config.hpp"
#include "mipt/simulate.hpp"
#include "mipt/tables.hpp"
#include "mipt/theory.hpp"
#include "mipt/trajectory.hpp"

namespace {

enum ExitCode { kOk = 0, kUsage = 1, kNumerical = 2, kIo = 3 };

struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> workers;
  std::string out;
  std::optional<double> gamma;
  std::optional<int> size;
  bool resume = false;
  bool force = false;
  bool quiet = false;
  std::optional<std::size_t> stop_after;
};

void add_run_flags(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config, "key = value run configuration file");
  cmd->add_option("--seed", f.seed, "base seed (overrides the config)");
  cmd->add_option("--workers", f.workers, "worker threads (overrides the config)");
  cmd->add_option("--out", f.out, "output directory (overrides the config)");
  cmd->add_option("--gamma", f.gamma, "measurement rate gamma/J (overrides the config)");
  cmd->add_option("--size", f.size, "linear size L (overrides the config)");
  cmd->add_flag("--resume", f.resume, "continue an interrupted run in the output directory");
  cmd->add_flag("--force", f.force, "overwrite an existing run");
  cmd->add_flag("--quiet", f.quiet, "no progress output");
  cmd->add_option("--stop-after", f.stop_after, "stop after this many trajectories")
      ->group("");
}

mipt::RunConfig build_config(const CommonFlags& f) {
  mipt::RunConfig c = f.config.empty() ? mipt::RunConfig{} : mipt::load_run_config(f.config);
  if (f.seed) c.base_seed = *f.seed;
  if (f.workers) c.n_workers = *f.workers;
  if (!f.out.empty()) c.output_dir = f.out;
  if (f.gamma) c.trajectory.gamma = *f.gamma;
  if (f.size) c.trajectory.lattice.size = *f.size;
  c.validate();
  return c;
}

mipt::SimulateOptions build_options(const CommonFlags& f) {
  mipt::SimulateOptions o;
  o.resume = f.resume;
  o.overwrite = f.force;
  o.stop_after = f.stop_after;
  if (!f.quiet) o.log = [](const std::string& msg) { std::cerr << msg << "\n"; };
  return o;
}

template <class T>
std::vector<T> parse_list(const std::string& text) {
  std::vector<T> out;
  std::string item;
  for (char ch : text + ",") {
    if (ch == ',') {
      if (!item.empty()) {
        if constexpr (std::is_same_v<T, int>) {
          out.push_back(std::stoi(item));
        } else {
          out.push_back(std::stod(item));
        }
      }
      item.clear();
    } else if (ch != ' ') {
      item += ch;
    }
  }
  if (out.empty()) throw mipt::InvalidInput("empty list '" + text + "'");
  return out;
}

void emit(const std::string& text, const std::string& out) {
  if (out.empty() || out == "-") {
    std::cout << text;
  } else {
    mipt::write_file_atomic(out, text);
  }
}

nlohmann::json number_or_null(double v) {
  return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}

struct CollapseFlags {
  std::string input;
  double gamma_c = 2.9;
  double nu = 1.4;
  bool fit_zeta = false;
  std::string window = "2.4,3.4";
  bool no_window = false;
  std::string out;
};

int run_collapse(const CollapseFlags& f) {
  const auto data = mipt::read_scaling_dataset(f.input);
  const mipt::Table source = mipt::read_table(f.input);
  mipt::collapse::FitOptions opt;
  opt.fit_zeta = f.fit_zeta;
  if (f.no_window) {
    opt.window.reset();
  } else {
    const auto w = parse_list<double>(f.window);
    if (w.size() != 2 || !(w[0] < w[1])) throw mipt::InvalidInput("--window needs lo,hi");
    opt.window = std::pair{w[0], w[1]};
  }
  const auto r = mipt::collapse::fit_collapse(data, f.gamma_c, f.nu, opt);
  const auto crossing = mipt::collapse::crossing_locator(mipt::collapse::curves_from(data));

  nlohmann::json j;
  j["tool"] = "mipt";
  j["version"] = mipt::tool_version();
  j["config_digest"] = source.get_meta("config_digest").value_or("");
  j["family_digest"] = source.get_meta("family_digest").value_or("");
  j["input"] = f.input;
  j["gamma_c"] = r.gamma_c;
  j["gamma_c_err"] = number_or_null(r.gamma_c_err);
  j["nu"] = r.nu;
  j["nu_err"] = number_or_null(r.nu_err);
  j["zeta"] = r.zeta ? nlohmann::json(*r.zeta) : nlohmann::json(nullptr);
  j["zeta_err"] = r.zeta_err ? number_or_null(*r.zeta_err) : nlohmann::json(nullptr);
  j["chi2"] = number_or_null(r.chi2);
  nlohmann::json cov = nlohmann::json::array();
  for (Eigen::Index a = 0; a < r.covariance.rows(); ++a) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index b = 0; b < r.covariance.cols(); ++b) {
      row.push_back(number_or_null(r.covariance(a, b)));
    }
    cov.push_back(row);
  }
  j["covariance"] = cov;
  j["errors_reliable"] = r.errors_reliable;
  j["converged"] = r.converged;
  j["iterations"] = r.iterations;
  j["n_points"] = r.n_points;
  j["excluded_points"] = r.excluded_points;
  j["window"] = r.window ? nlohmann::json{r.window->first, r.window->second}
                         : nlohmann::json(nullptr);
  j["crossing"] = {{"found", crossing.found},
                   {"median", crossing.found ? nlohmann::json(crossing.median)
                                             : nlohmann::json(nullptr)},
                   {"spread", crossing.found ? nlohmann::json(crossing.spread)
                                             : nlohmann::json(nullptr)}};
  emit(j.dump(2) + "\n", f.out);
  return r.converged ? kOk : kNumerical;
}

struct TheoryFlags {
  std::string table = "rg";
  mipt::theory::NLSMParams p;
  double ell_max = 1e6;
  int samples = 101;
  std::string out;
};

int run_theory(const TheoryFlags& f) {
  namespace th = mipt::theory;
  const th::NLSMParams& p = f.p;
  p.validate();
  mipt::Table t;
  char buf[256];
  std::snprintf(buf, sizeof buf, "d=%.17g J=%.17g gamma=%.17g rho=%.17g R=%.17g", p.d,
                p.hopping, p.gamma, p.filling, p.replicas);
  t.set_meta("config_digest", mipt::fnv1a_hex(buf));
  t.set_meta("parameters", buf);
  if (f.table == "rg") {
    const auto flow = th::rg_flow(p, f.ell_max, f.samples);
    t.columns = {"ell", "G", "G_exact", "Z"};
    for (const auto& s : flow.states) t.rows.push_back({s.ell, s.G, s.G_exact, s.Z});
    t.set_meta("localized", flow.localized ? "true" : "false");
    if (flow.localized) t.set_meta("ell_localized", std::to_string(flow.ell_localized));
  } else if (f.table == "critical") {
    const auto c = th::critical_quantities(p);
    t.columns = {"g0", "l0", "G0", "G_c", "nu", "zeta", "l_corr"};
    t.rows.push_back({p.g0(), p.l0(), p.G0(), c.G_c, c.nu, c.zeta, c.l_corr});
  } else if (f.table == "scaling") {
    const double nu = p.epsilon() > 0.0 ? 1.0 / p.epsilon() : std::nan("");
    const double G_c = p.epsilon() > 0.0 ? p.replicas / (4.0 * M_PI * p.epsilon()) : std::nan("");
    t.columns = {"x",           "f_metallic",     "f_localized",
                 "cov_metallic", "cov_critical", "cov_localized"};
    for (int i = 0; i < f.samples; ++i) {
      const double x = std::pow(10.0, -2.0 + 4.0 * i / std::max(1, f.samples - 1));
      t.rows.push_back({x, th::scaling_function(th::Phase::metallic, x, nu, p.d).value,
                        th::scaling_function(th::Phase::localized, x, nu, p.d).value,
                        th::covariance_scaling(th::Phase::metallic, x, p.d, G_c).value,
                        th::covariance_scaling(th::Phase::critical, x, p.d, G_c).value,
                        th::covariance_scaling(th::Phase::localized, x, p.d, G_c).value});
    }
  } else if (f.table == "gaussian") {
    t.columns = {"ell", "C2", "q", "C_q", "C_x"};
    const double l0 = p.l0();
    for (int i = 0; i < f.samples; ++i) {
      const double s = static_cast<double>(i) / std::max(1, f.samples - 1);
      const double ell = l0 * std::pow(f.ell_max / l0, s);
      const double q = M_PI * s;
      t.rows.push_back({ell, th::gaussian_cumulant(p, ell), q, th::gaussian_correlator_q(p, q),
                        th::gaussian_correlator_x(p, ell)});
    }
  } else {
    throw mipt::InvalidInput("unknown theory table '" + f.table +
                             "' (rg, critical, scaling, gaussian)");
  }
  emit(mipt::format_table(t), f.out);
  return kOk;
}

struct OracleFlags {
  int dim = 2;
  int size = 2;
  double gamma = 1.0;
  double filling = 0.5;
  std::size_t events = 50;
  std::uint64_t seed = 1;
  std::string initial = "ground";
  double probability_tolerance = 1e-10;
  double green_tolerance = 1e-8;
};

int run_oracle_check(const OracleFlags& f) {
  mipt::TrajectoryConfig c;
  c.lattice.dim = f.dim;
  c.lattice.size = f.size;
  c.gamma = f.gamma;
  c.filling = f.filling;
  c.initial = mipt::parse_initial_state(f.initial);
  const auto check = mipt::exact::oracle_check(c, f.events, f.seed);
  const auto& r = check.report;
  const bool ok = r.max_probability_deviation <= f.probability_tolerance &&
                  r.max_green_deviation <= f.green_tolerance;
  std::printf("events=%zu max_probability_deviation=%.3e max_green_deviation=%.3e %s\n",
              r.steps, r.max_probability_deviation, r.max_green_deviation,
              ok ? "PASS" : "FAIL");
  return ok ? kOk : kNumerical;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Monitored free-fermion trajectories and their analysis"};
  app.require_subcommand(0, 1);
  bool print_config = false;
  app.add_flag("--print-config", print_config, "print the default configuration and exit");
  app.set_version_flag("--version", mipt::tool_version());

  CommonFlags sim_flags;
  auto* sim = app.add_subcommand("simulate", "run trajectories and write observable tables");
  add_run_flags(sim, sim_flags);

  CommonFlags sweep_flags;
  std::string sweep_gammas, sweep_sizes;
  auto* sw = app.add_subcommand("sweep", "simulate every (L, gamma) cell of a grid");
  add_run_flags(sw, sweep_flags);
  sw->add_option("--gammas", sweep_gammas, "comma-separated gamma/J values")->required();
  sw->add_option("--sizes", sweep_sizes, "comma-separated linear sizes")->required();

  std::vector<std::string> an_inputs;
  std::string an_mode, an_out = "analysis";
  bool an_force = false;
  auto* an = app.add_subcommand("analyze", "build plot-ready tables from run outputs");
  an->add_option("--mode", an_mode, "momentum, covariance or entropy")->required();
  an->add_option("inputs", an_inputs, "run directories or CSV files")->required();
  an->add_option("--out", an_out, "output directory");
  an->add_flag("--force", an_force, "combine inputs with different digests");

  CollapseFlags co;
  auto* col = app.add_subcommand("collapse", "fit gamma_c and nu to a covariance dataset");
  col->add_option("input", co.input, "covariance CSV (sweep or analyze output)")->required();
  col->add_option("--gamma-c", co.gamma_c, "initial gamma_c/J");
  col->add_option("--nu", co.nu, "initial nu");
  col->add_flag("--fit-zeta", co.fit_zeta, "also fit the exponent zeta in G/L^zeta");
  col->add_option("--window", co.window, "gamma window lo,hi");
  col->add_flag("--no-window", co.no_window, "use every gamma");
  col->add_option("--out", co.out, "JSON output file (default stdout)");

  TheoryFlags tf;
  auto* th = app.add_subcommand("theory", "tables of the analytic predictions");
  th->add_option("--table", tf.table, "rg, critical, scaling or gaussian");
  th->add_option("--dim", tf.p.d, "dimension d (may be non-integer)");
  th->add_option("--hopping", tf.p.hopping, "J");
  th->add_option("--gamma", tf.p.gamma, "measurement rate");
  th->add_option("--filling", tf.p.filling, "rho");
  th->add_option("--replicas", tf.p.replicas, "R");
  th->add_option("--ell-max", tf.ell_max, "largest length scale");
  th->add_option("--samples", tf.samples, "rows");
  th->add_option("--out", tf.out, "CSV output file (default stdout)");

  OracleFlags of;
  auto* oc = app.add_subcommand("oracle-check",
                                "compare the Gaussian engine with exact many-body evolution");
  oc->add_option("--dim", of.dim, "lattice dimension");
  oc->add_option("--size", of.size, "linear size (at most 12 sites in total)");
  oc->add_option("--gamma", of.gamma, "measurement rate");
  oc->add_option("--filling", of.filling, "rho");
  oc->add_option("--events", of.events, "measurement events");
  oc->add_option("--seed", of.seed, "seed");
  oc->add_option("--initial", of.initial, "ground, coordinate_bitstring or eigen_bitstring");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kUsage;
  }

  try {
    if (print_config) {
      std::cout << mipt::RunConfig{}.to_text();
      return kOk;
    }
    if (sim->parsed()) {
      const mipt::RunConfig c = build_config(sim_flags);
      const auto s = mipt::simulate(c, build_options(sim_flags));
      std::cout << "completed " << s.completed << " trajectories (" << s.failed
                << " failed) in " << s.output_dir.string() << "\n";
      return kOk;
    }
    if (sw->parsed()) {
      const mipt::RunConfig c = build_config(sweep_flags);
      const auto gammas = parse_list<double>(sweep_gammas);
      const auto sizes = parse_list<int>(sweep_sizes);
      const auto s = mipt::sweep(c, gammas, sizes, build_options(sweep_flags));
      int failed = 0;
      for (const auto& cell : s.cells) {
        if (!cell.ok) {
          ++failed;
          std::cerr << "cell L=" << cell.size << " gamma=" << cell.gamma
                    << " failed: " << cell.error << "\n";
        }
      }
      std::cout << "sweep: " << s.cells.size() - failed << "/" << s.cells.size()
                << " cells ok, combined table " << s.combined.string() << "\n";
      return failed ? kNumerical : kOk;
    }
    if (an->parsed()) {
      std::vector<std::filesystem::path> paths(an_inputs.begin(), an_inputs.end());
      const auto r = mipt::analyze(paths, mipt::parse_analyze_mode(an_mode), an_force);
      mipt::write_analysis(r, an_out);
      for (const auto& [name, t] : r.tables) {
        std::cout << (std::filesystem::path(an_out) / name).string() << ": " << t.rows.size()
                  << " rows\n";
      }
      return kOk;
    }
    if (col->parsed()) return run_collapse(co);
    if (th->parsed()) return run_theory(tf);
    if (oc->parsed()) return run_oracle_check(of);
    std::cout << app.help();
    return kUsage;
  } catch (const mipt::NoTransition& e) {
    std::cerr << "no transition: " << e.what() << "\n";
    return kNumerical;
  } catch (const mipt::InvalidInput& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const mipt::NumericalDegradation& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kNumerical;
  } catch (const mipt::IoError& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return kIo;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kNumerical;
  }
}
