#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

namespace rbctl {

/// Shortest decimal form that reads back to the same double ("%.17g").
std::string format_double(double value);
/// format_double, or an empty field when absent.
std::string format_optional(const std::optional<double>& value);

/// Comma-separated writer for numeric tables; fields are never quoted.
class CsvWriter {
 public:
  explicit CsvWriter(const std::filesystem::path& path);
  void header(const std::vector<std::string>& names);
  void row(const std::vector<std::string>& fields);
  void row(const std::vector<double>& values);

 private:
  std::filesystem::path path_;
  std::ofstream out_;
};

/// A numeric CSV with one header line. Empty fields read as NaN.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  /// Index of a named column; throws IoError if missing.
  std::size_t column(const std::string& name) const;
};

CsvTable read_csv(const std::filesystem::path& path);

}  // namespace rbctl
