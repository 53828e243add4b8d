#pragma once

// File emission helpers shared by the subcommands: CSV with 17 significant
// digits, JSON sidecars and the hashed run manifest.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace rtsim::cli {

namespace fs = std::filesystem;
using nlohmann::json;

/// 17 significant digits, "inf"/"-inf"/"nan" for non-finite values.
std::string format_double(double x);
/// Shortest representation that parses back to x.
std::string format_double_short(double x);
/// Parses a double, accepting "inf", "+inf", "-inf" and "nan". Throws
/// std::invalid_argument on trailing garbage.
double parse_double(std::string_view text);

/// JSON-safe double: non-finite values become the strings "inf"/"-inf"/"nan".
json json_number(double x);

class CsvWriter {
 public:
  CsvWriter(const fs::path& path, const std::vector<std::string>& header);
  CsvWriter& cell(double x);
  CsvWriter& cell(std::uint64_t x);
  CsvWriter& cell(std::int64_t x);
  CsvWriter& cell(int x) { return cell(static_cast<std::int64_t>(x)); }
  CsvWriter& cell(std::string_view s);
  void end_row();
  void close();
  const fs::path& path() const { return path_; }

 private:
  void separator();
  fs::path path_;
  std::ofstream out_;
  std::size_t columns_ = 0;
  std::size_t in_row_ = 0;
};

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Index of a header column; throws std::runtime_error if absent.
  std::size_t column(std::string_view name) const;
};

CsvTable read_csv(const fs::path& path);

void write_json(const fs::path& path, const json& value);
json read_json(const fs::path& path);

/// Hex SHA-256 of a file's bytes.
std::string sha256_file(const fs::path& path);

/// Tracks files written under an output directory and writes manifest.json.
class Manifest {
 public:
  explicit Manifest(fs::path root) : root_(std::move(root)) {}
  const fs::path& root() const { return root_; }
  void add(const fs::path& file);
  /// Writes manifest.json with `header` merged in and a sorted file list
  /// (path relative to the root, sha256, bytes).
  void write(json header) const;
  const std::vector<fs::path>& files() const { return files_; }

 private:
  fs::path root_;
  std::vector<fs::path> files_;
};

}  // namespace rtsim::cli
