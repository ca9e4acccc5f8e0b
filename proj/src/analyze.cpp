#include "mipt/analyze.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "mipt/errors.hpp"
#include "mipt/observables.hpp"
#include "mipt/theory.hpp"
#include "mipt/trajectory.hpp"

namespace mipt {

namespace {

namespace fs = std::filesystem;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

fs::path resolve_input(const fs::path& input, AnalyzeMode mode) {
  if (!fs::is_directory(input)) return input;
  switch (mode) {
    case AnalyzeMode::momentum: return input / "correlator.csv";
    case AnalyzeMode::covariance:
      if (fs::exists(input / "sweep_covariance.csv")) return input / "sweep_covariance.csv";
      return input / "covariance.csv";
    case AnalyzeMode::entropy: return input / "entropy.csv";
  }
  return input;
}

double meta_number(const Table& t, const std::string& key, const fs::path& path) {
  const auto v = t.get_meta(key);
  if (!v) throw InvalidInput(path.string() + ": missing metadata '" + key + "'");
  try {
    return std::stod(*v);
  } catch (const std::exception&) {
    throw InvalidInput(path.string() + ": bad metadata '" + key + "'");
  }
}

std::vector<double> need_column(const Table& t, const std::string& name, const fs::path& path) {
  const auto it = std::find(t.columns.begin(), t.columns.end(), name);
  if (it == t.columns.end()) {
    throw InvalidInput(path.string() + ": schema mismatch, no column '" + name + "'");
  }
  return t.column(name);
}

struct Loaded {
  fs::path path;
  Table table;
};

std::vector<Loaded> load_all(const std::vector<fs::path>& inputs, AnalyzeMode mode, bool force) {
  if (inputs.empty()) throw InvalidInput("analyze: no inputs");
  std::vector<Loaded> out;
  std::set<std::string> families;
  for (const auto& in : inputs) {
    const fs::path p = resolve_input(in, mode);
    out.push_back({p, read_table(p)});
    families.insert(out.back().table.get_meta("family_digest").value_or("?"));
  }
  if (families.size() > 1 && !force) {
    throw InvalidInput("analyze: inputs come from different configurations (mixed digests); "
                       "use --force to combine them anyway");
  }
  return out;
}

// Metadata of an analysis table: the shared family digest and a digest of
// the sorted input config digests.
void stamp(Table& out, const std::vector<Loaded>& in) {
  std::set<std::string> digests;
  std::set<std::string> families;
  for (const auto& l : in) {
    digests.insert(l.table.get_meta("config_digest").value_or("?"));
    families.insert(l.table.get_meta("family_digest").value_or("?"));
  }
  std::string joined;
  for (const auto& d : digests) joined += d + "\n";
  out.set_meta("config_digest", fnv1a_hex(joined));
  std::string fam;
  for (const auto& f : families) fam += (fam.empty() ? "" : "+") + f;
  out.set_meta("family_digest", fam);
  out.set_meta("n_inputs", std::to_string(in.size()));
}

theory::NLSMParams params_of(const Table& t, const fs::path& p) {
  theory::NLSMParams np;
  np.d = meta_number(t, "dim", p);
  np.hopping = meta_number(t, "hopping", p);
  np.gamma = meta_number(t, "gamma", p);
  np.filling = meta_number(t, "filling", p);
  return np;
}

void analyze_momentum(const std::vector<Loaded>& in, AnalyzeResult& result) {
  Table rows;
  rows.columns = {"L",  "gamma",  "g0",        "l0",           "m",           "q",
                  "q_tilde", "q_tilde_l0", "C",   "C_err", "C_over_qt", "C_over_qt_err",
                  "C_over_g0qt", "C_over_g0qt_err"};
  Table icpt;
  icpt.columns = {"L", "gamma", "g0", "intercept", "intercept_err"};
  for (const auto& [path, t] : in) {
    const double L = meta_number(t, "size", path);
    const auto np = params_of(t, path);
    const bool has_scale = np.gamma > 0.0;
    const double g0 = has_scale ? np.g0() : kNaN;
    const double l0 = has_scale ? np.l0() : kNaN;
    const auto m = need_column(t, "m", path);
    const auto q = need_column(t, "q", path);
    const auto C = need_column(t, "C", path);
    const auto err = need_column(t, "C_err", path);
    std::vector<double> fq, fy, fe;
    for (std::size_t i = 0; i < q.size(); ++i) {
      const double qt = q_tilde(q[i]);
      const double r = qt > 0.0 ? C[i] / qt : kNaN;
      const double re = qt > 0.0 ? err[i] / qt : kNaN;
      rows.rows.push_back({L, np.gamma, g0, l0, m[i], q[i], qt, qt * l0, C[i], err[i], r, re,
                           r / g0, re / g0});
      if (qt > 0.0 && fq.size() < 5) {
        fq.push_back(qt);
        fy.push_back(r / g0);
        fe.push_back(re / g0);
      }
    }
    double value = kNaN;
    double value_err = kNaN;
    const bool usable = fq.size() == 5 && std::all_of(fe.begin(), fe.end(), [](double e) {
                          return e > 0.0 && std::isfinite(e);
                        });
    if (usable) {
      const auto r = collapse::extrapolate_q0(fq, fy, fe);
      value = r.value;
      value_err = r.std_err;
    }
    icpt.rows.push_back({L, np.gamma, g0, value, value_err});
  }
  stamp(rows, in);
  stamp(icpt, in);
  result.tables["momentum.csv"] = std::move(rows);
  result.tables["momentum_intercept.csv"] = std::move(icpt);
}

void analyze_covariance(const std::vector<Loaded>& in, bool force, AnalyzeResult& result) {
  Table out;
  out.columns = {"L", "gamma", "G_AB", "G_AB_err", "n_trajectories"};
  std::set<std::pair<double, double>> cells;
  for (const auto& [path, t] : in) {
    const auto L = need_column(t, "L", path);
    const auto g = need_column(t, "gamma", path);
    const auto v = need_column(t, "G_AB", path);
    const auto e = need_column(t, "G_AB_err", path);
    const bool per_row = std::find(t.columns.begin(), t.columns.end(), "n_trajectories") !=
                         t.columns.end();
    const auto n = per_row ? t.column("n_trajectories") : std::vector<double>{};
    const double n_meta = per_row ? 0.0 : meta_number(t, "n_trajectories", path);
    for (std::size_t i = 0; i < L.size(); ++i) {
      if (!cells.insert({L[i], g[i]}).second && !force) {
        throw InvalidInput("analyze: cell L=" + std::to_string(L[i]) +
                           " gamma=" + std::to_string(g[i]) +
                           " appears in more than one input; use --force to keep both");
      }
      out.rows.push_back({L[i], g[i], v[i], e[i], per_row ? n[i] : n_meta});
    }
  }
  std::sort(out.rows.begin(), out.rows.end());
  stamp(out, in);
  result.tables["covariance_dataset.csv"] = std::move(out);
}

void analyze_entropy(const std::vector<Loaded>& in, AnalyzeResult& result) {
  Table out;
  out.columns = {"L",  "gamma",  "ell",   "ell_tilde", "S",         "S_err",
                 "S_scaled", "C2", "C2_err", "ratio", "ratio_err"};
  for (const auto& [path, t] : in) {
    const double L = meta_number(t, "size", path);
    const double J = meta_number(t, "hopping", path);
    const double gamma = meta_number(t, "gamma", path);
    const auto ell = need_column(t, "ell", path);
    const auto S = need_column(t, "S", path);
    const auto Se = need_column(t, "S_err", path);
    const auto C2 = need_column(t, "C2", path);
    const auto C2e = need_column(t, "C2_err", path);
    const auto ratio = need_column(t, "ratio", path);
    const auto ratio_e = need_column(t, "ratio_err", path);
    for (std::size_t i = 0; i < ell.size(); ++i) {
      out.rows.push_back({L, gamma, ell[i], chord_length(static_cast<int>(L), ell[i]), S[i],
                          Se[i], S[i] * gamma / (J * L), C2[i], C2e[i], ratio[i], ratio_e[i]});
    }
  }
  stamp(out, in);
  result.tables["entropy_profile.csv"] = std::move(out);
}

}  // namespace

AnalyzeMode parse_analyze_mode(const std::string& name) {
  if (name == "momentum") return AnalyzeMode::momentum;
  if (name == "covariance") return AnalyzeMode::covariance;
  if (name == "entropy") return AnalyzeMode::entropy;
  throw InvalidInput("unknown analyze mode '" + name + "' (momentum, covariance, entropy)");
}

AnalyzeResult analyze(const std::vector<fs::path>& inputs, AnalyzeMode mode, bool force) {
  const auto loaded = load_all(inputs, mode, force);
  AnalyzeResult result;
  switch (mode) {
    case AnalyzeMode::momentum: analyze_momentum(loaded, result); break;
    case AnalyzeMode::covariance: analyze_covariance(loaded, force, result); break;
    case AnalyzeMode::entropy: analyze_entropy(loaded, result); break;
  }
  return result;
}

void write_analysis(const AnalyzeResult& result, const fs::path& out_dir) {
  fs::create_directories(out_dir);
  for (const auto& [name, table] : result.tables) write_table(out_dir / name, table);
}

collapse::ScalingDataset read_scaling_dataset(const fs::path& path) {
  const Table t = read_table(path);
  const auto L = need_column(t, "L", path);
  const auto g = need_column(t, "gamma", path);
  const auto v = need_column(t, "G_AB", path);
  const auto e = need_column(t, "G_AB_err", path);
  collapse::ScalingDataset d;
  for (std::size_t i = 0; i < L.size(); ++i) d.points.push_back({L[i], g[i], v[i], e[i]});
  return d;
}

}  // namespace mipt
