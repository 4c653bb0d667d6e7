#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "geoprop/geodesy.hpp"

namespace geoprop::tsv {

enum class ParseMode { kLenient, kStrict };

struct ParseIssue {
  std::size_t line = 0;
  std::string message;
};

struct ParseDiagnostics {
  std::vector<ParseIssue> issues;
  std::size_t rows = 0;  // data rows accepted
};

/// Reads tab-separated rows, skipping blank lines and '#' comments.
///
/// reject() reports the current row: in strict mode it throws
/// Error(kMalformedRecord) naming the line, in lenient mode it is recorded
/// in the diagnostics and the caller moves on.
class RowReader {
 public:
  RowReader(std::istream& in, ParseMode mode, ParseDiagnostics* diagnostics = nullptr);

  bool next();
  std::span<const std::string_view> fields() const noexcept { return fields_; }
  std::size_t line_number() const noexcept { return line_number_; }
  void reject(std::string_view why);
  void accept();

 private:
  std::istream& in_;
  ParseMode mode_;
  ParseDiagnostics* diagnostics_;
  std::string line_;
  std::vector<std::string_view> fields_;
  std::size_t line_number_ = 0;
};

std::vector<std::string_view> split(std::string_view line, char sep = '\t');

std::optional<double> parse_double(std::string_view s);
std::optional<std::uint64_t> parse_uint(std::string_view s);
std::optional<GeoPoint> parse_point(std::string_view lat, std::string_view lon);

using Timestamp = std::chrono::sys_seconds;

/// Accepts YYYY-MM-DD, YYYY-MM-DDTHH:MM[:SS][Z|+HH:MM|-HH:MM]; result is UTC.
std::optional<Timestamp> parse_iso8601(std::string_view s);
std::string format_iso8601(Timestamp t);

/// Six fractional digits; never prints "-0.000000".
std::string format_degrees(double deg);
/// Three fractional digits.
std::string format_km(double km);

std::string read_file(const std::filesystem::path& path);

/// Writes through a sibling temporary file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

}  // namespace geoprop::tsv
