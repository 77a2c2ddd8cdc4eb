#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "config.hpp"

namespace hotr::cli {

/// Writes through a temporary file in the same directory and renames it into place.
void write_atomic(const std::filesystem::path& path, const std::string& content);

/// Row-oriented CSV whose leading comment lines carry the command, config hash and units.
class CsvWriter {
 public:
  CsvWriter(std::string command, std::string config_hash, std::string units, std::vector<std::string> columns);

  template <class... T>
  void row(const T&... values) {
    std::string line;
    (append(line, values), ...);
    line.back() = '\n';
    body_ += line;
  }
  std::string str() const;

 private:
  static void append(std::string& line, const std::string& v) { line += v + ","; }
  static void append(std::string& line, const char* v) { line += std::string(v) + ","; }
  static void append(std::string& line, double v);
  static void append(std::string& line, int v) { line += std::to_string(v) + ","; }
  static void append(std::string& line, long v) { line += std::to_string(v) + ","; }

  std::string header_;
  std::string body_;
};

/// {"command", "config_hash", "units", "config", "result"}; timings go in "timing".
json envelope(const std::string& command, const ExperimentConfig& cfg, json units, json result);

/// Round-trip formatting of a double.
std::string fmt_double(double v);

}  // namespace hotr::cli
