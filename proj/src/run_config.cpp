#include "mipt/run_config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

#include "mipt/errors.hpp"
#include "mipt/rng.hpp"

namespace mipt {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double to_double(const std::string& key, const std::string& value) {
  double out = 0.0;
  const auto* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) {
    throw InvalidInput("config: " + key + " expects a number, got '" + value + "'");
  }
  return out;
}

template <class Int>
Int to_int(const std::string& key, const std::string& value) {
  Int out = 0;
  const auto* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) {
    throw InvalidInput("config: " + key + " expects an integer, got '" + value + "'");
  }
  return out;
}

bool to_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw InvalidInput("config: " + key + " expects true or false");
}

std::string join_observables(const std::vector<Observable>& list) {
  std::string s;
  for (std::size_t i = 0; i < list.size(); ++i) {
    if (i) s += ",";
    s += to_string(list[i]);
  }
  return s;
}

}  // namespace

std::string to_string(Observable o) {
  switch (o) {
    case Observable::correlator: return "correlator";
    case Observable::covariance: return "covariance";
    case Observable::mutual_info: return "mutual_info";
    case Observable::entropy: return "entropy";
  }
  return "correlator";
}

Observable parse_observable(const std::string& text) {
  if (text == "correlator") return Observable::correlator;
  if (text == "covariance") return Observable::covariance;
  if (text == "mutual_info") return Observable::mutual_info;
  if (text == "entropy") return Observable::entropy;
  throw InvalidInput("unknown observable '" + text + "'");
}

void RunConfig::validate() const {
  trajectory.validate();
  if (n_trajectories < 1) throw InvalidInput("config: n_trajectories must be >= 1");
  if (n_workers < 1) throw InvalidInput("config: n_workers must be >= 1");
  if (output_dir.empty()) throw InvalidInput("config: output_dir is empty");
  const bool strips = wants(Observable::covariance) || wants(Observable::mutual_info);
  if (strips && trajectory.lattice.size % 4 != 0) {
    throw InvalidInput("config: covariance and mutual_info need size divisible by 4");
  }
}

bool RunConfig::wants(Observable o) const {
  return std::find(observables.begin(), observables.end(), o) != observables.end();
}

std::string RunConfig::to_text() const {
  std::ostringstream os;
  os.precision(17);
  const auto& t = trajectory;
  os << "dim = " << t.lattice.dim << "\n"
     << "size = " << t.lattice.size << "\n"
     << "hopping = " << t.lattice.hopping << "\n"
     << "gamma = " << t.gamma << "\n"
     << "filling = " << t.filling << "\n"
     << "total_time = ";
  if (t.total_time) {
    os << *t.total_time;
  } else {
    os << "auto";
  }
  os << "\n"
     << "initial_state = " << to_string(t.initial) << "\n"
     << "burn_measurements = " << t.burn_measurements << "\n"
     << "burn_traversals = " << t.burn_traversals << "\n"
     << "repurify_interval = " << t.repurify.interval << "\n"
     << "repurify_tolerance = " << t.repurify.tolerance << "\n"
     << "record_outcomes = " << (t.record_outcomes ? "true" : "false") << "\n"
     << "n_trajectories = " << n_trajectories << "\n"
     << "base_seed = " << base_seed << "\n"
     << "n_workers = " << n_workers << "\n"
     << "observables = " << join_observables(observables) << "\n"
     << "output_dir = " << output_dir.string() << "\n";
  return os.str();
}

std::string RunConfig::digest() const {
  return fnv1a_hex(trajectory.canonical_text() + "observables=" +
                   join_observables(observables) + "\nbase_seed=" + std::to_string(base_seed) +
                   "\n");
}

std::string RunConfig::family_digest() const {
  TrajectoryConfig t = trajectory;
  t.gamma = 0.0;
  t.lattice.size = 0;
  return fnv1a_hex(t.canonical_text() + "observables=" + join_observables(observables) + "\n");
}

RunConfig parse_run_config(const std::string& text) {
  RunConfig c;
  std::map<std::string, std::string> seen;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw InvalidInput("config line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (!seen.emplace(key, value).second) {
      throw InvalidInput("config: duplicate key '" + key + "'");
    }
    auto& t = c.trajectory;
    if (key == "dim") {
      t.lattice.dim = to_int<int>(key, value);
    } else if (key == "size") {
      t.lattice.size = to_int<int>(key, value);
    } else if (key == "hopping") {
      t.lattice.hopping = to_double(key, value);
    } else if (key == "gamma") {
      t.gamma = to_double(key, value);
    } else if (key == "filling") {
      t.filling = to_double(key, value);
    } else if (key == "total_time") {
      if (value == "auto") {
        t.total_time.reset();
      } else {
        t.total_time = to_double(key, value);
      }
    } else if (key == "initial_state") {
      t.initial = parse_initial_state(value);
    } else if (key == "burn_measurements") {
      t.burn_measurements = to_double(key, value);
    } else if (key == "burn_traversals") {
      t.burn_traversals = to_double(key, value);
    } else if (key == "repurify_interval") {
      t.repurify.interval = to_int<std::size_t>(key, value);
    } else if (key == "repurify_tolerance") {
      t.repurify.tolerance = to_double(key, value);
    } else if (key == "record_outcomes") {
      t.record_outcomes = to_bool(key, value);
    } else if (key == "n_trajectories") {
      c.n_trajectories = to_int<std::size_t>(key, value);
    } else if (key == "base_seed") {
      c.base_seed = to_int<std::uint64_t>(key, value);
    } else if (key == "n_workers") {
      c.n_workers = to_int<unsigned>(key, value);
    } else if (key == "observables") {
      c.observables.clear();
      std::istringstream list(value);
      std::string item;
      while (std::getline(list, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        const Observable o = parse_observable(item);
        if (!c.wants(o)) c.observables.push_back(o);
      }
    } else if (key == "output_dir") {
      c.output_dir = value;
    } else {
      throw InvalidInput("config: unknown key '" + key + "'");
    }
  }
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_run_config(buf.str());
}

std::uint64_t trajectory_seed(const RunConfig& config, std::size_t index) {
  return derive_seed(config.base_seed, index);
}

}  // namespace mipt
