#include "mipt/tables.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "mipt/errors.hpp"

namespace mipt {

namespace {

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_number(const std::string& cell, const std::filesystem::path& path) {
  if (cell == "nan" || cell.empty()) return std::nan("");
  if (cell == "inf") return INFINITY;
  if (cell == "-inf") return -INFINITY;
  double v = 0.0;
  const auto* end = cell.data() + cell.size();
  const auto [ptr, ec] = std::from_chars(cell.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    throw IoError(path.string() + ": bad number '" + cell + "'");
  }
  return v;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) {
    if (!cell.empty() && cell.back() == '\r') cell.pop_back();
    out.push_back(cell);
  }
  return out;
}

}  // namespace

std::string tool_version() { return MIPT_VERSION; }

void Table::set_meta(const std::string& key, const std::string& value) {
  for (auto& [k, v] : meta) {
    if (k == key) {
      v = value;
      return;
    }
  }
  meta.emplace_back(key, value);
}

std::optional<std::string> Table::get_meta(const std::string& key) const {
  for (const auto& [k, v] : meta) {
    if (k == key) return v;
  }
  return std::nullopt;
}

std::size_t Table::column_index(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i] == name) return i;
  }
  throw IoError("table has no column '" + name + "'");
}

std::vector<double> Table::column(const std::string& name) const {
  const std::size_t i = column_index(name);
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r[i]);
  return out;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw IoError("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename " + tmp.string() + ": " + ec.message());
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string format_table(const Table& table) {
  std::ostringstream os;
  os << "# mipt " << tool_version();
  if (auto d = table.get_meta("config_digest")) os << " config_digest=" << *d;
  os << "\n";
  for (const auto& [k, v] : table.meta) {
    if (k != "config_digest" && k != "tool_version") os << "# " << k << "=" << v << "\n";
  }
  for (std::size_t i = 0; i < table.columns.size(); ++i) {
    os << (i ? "," : "") << table.columns[i];
  }
  os << "\n";
  for (const auto& row : table.rows) {
    if (row.size() != table.columns.size()) throw IoError("table row has wrong width");
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << format_number(row[i]);
    os << "\n";
  }
  return os.str();
}

void write_table(const std::filesystem::path& path, const Table& table) {
  write_file_atomic(path, format_table(table));
}

Table read_table(const std::filesystem::path& path) {
  std::istringstream in(read_file(path));
  Table t;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::string body = line.substr(1);
      if (first) {
        first = false;
        std::istringstream words(body);
        std::string tool, version, word;
        words >> tool >> version;
        if (tool != "mipt") throw IoError(path.string() + ": not a mipt table");
        t.set_meta("tool_version", version);
        while (words >> word) {
          const auto eq = word.find('=');
          if (eq != std::string::npos) t.set_meta(word.substr(0, eq), word.substr(eq + 1));
        }
        continue;
      }
      if (!body.empty() && body[0] == ' ') body.erase(0, 1);
      const auto eq = body.find('=');
      if (eq != std::string::npos) t.set_meta(body.substr(0, eq), body.substr(eq + 1));
      continue;
    }
    first = false;
    if (t.columns.empty()) {
      t.columns = split(line);
      continue;
    }
    const auto cells = split(line);
    if (cells.size() != t.columns.size()) {
      throw IoError(path.string() + ": row width differs from header");
    }
    std::vector<double> row;
    row.reserve(cells.size());
    for (const auto& c : cells) row.push_back(parse_number(c, path));
    t.rows.push_back(std::move(row));
  }
  if (t.columns.empty()) throw IoError(path.string() + ": no header row");
  return t;
}

}  // namespace mipt
