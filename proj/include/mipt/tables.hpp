#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace mipt {

/// Numeric CSV table with a commented header:
///
///   # mipt <version> config_digest=<hex>
///   # key=value            (any number of metadata lines)
///   col_a,col_b,...
///   1.5,nan,...
///
/// Numbers are written with 17 significant digits; a missing value is `nan`.
struct Table {
  std::vector<std::pair<std::string, std::string>> meta;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  void set_meta(const std::string& key, const std::string& value);
  std::optional<std::string> get_meta(const std::string& key) const;
  /// Throws IoError when the column is absent.
  std::size_t column_index(const std::string& name) const;
  std::vector<double> column(const std::string& name) const;
};

std::string format_table(const Table& table);
void write_table(const std::filesystem::path& path, const Table& table);
Table read_table(const std::filesystem::path& path);

/// Writes through a temporary file and a rename, so readers never see a
/// partial file.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);
std::string read_file(const std::filesystem::path& path);

/// Version string of this build.
std::string tool_version();

}  // namespace mipt
