#include "output.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <system_error>

#include <unistd.h>

#include "hotr/common.hpp"

namespace hotr::cli {

void write_atomic(const std::filesystem::path& path, const std::string& content) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw Error("write failed for " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp);
    throw Error("cannot move " + tmp.string() + " to " + path.string() + ": " + ec.message());
  }
}

std::string fmt_double(double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, r.ptr);
}

CsvWriter::CsvWriter(std::string command, std::string config_hash, std::string units,
                     std::vector<std::string> columns) {
  header_ = "# hotr " + command + "\n# config_hash " + config_hash + "\n# units " + units + "\n";
  for (std::size_t k = 0; k < columns.size(); ++k) header_ += (k ? "," : "") + columns[k];
  header_ += "\n";
}

void CsvWriter::append(std::string& line, double v) { line += fmt_double(v) + ","; }

std::string CsvWriter::str() const { return header_ + body_; }

json envelope(const std::string& command, const ExperimentConfig& cfg, json units, json result) {
  return {{"command", command},
          {"config_hash", cfg.hash()},
          {"units", std::move(units)},
          {"config", cfg.resolved()},
          {"result", std::move(result)}};
}

}  // namespace hotr::cli
