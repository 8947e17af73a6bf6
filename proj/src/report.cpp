#include "emdsketch/report.hpp"

#include <fstream>
#include <sstream>

#include "emdsketch/common.hpp"
#include "emdsketch/measure.hpp"
#include "emdsketch/rng.hpp"

namespace emdsketch {

uint64_t config_hash(const std::string& config_json) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : config_json) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return mix64(h);
}

CsvReport::CsvReport(std::vector<std::string> columns, std::string config_json, uint64_t seed)
    : columns_(std::move(columns)),
      config_json_(std::move(config_json)),
      config_hash_(config_hash(config_json_)),
      seed_(seed) {}

void CsvReport::add_row(const std::vector<std::string>& cells) {
  require(cells.size() == columns_.size(), "csv report: row width mismatch");
  rows_.push_back(cells);
}

std::string CsvReport::to_string() const {
  std::ostringstream out;
  out << "# version=" << kVersion << " config_hash=" << std::hex << config_hash_ << std::dec
      << " seed=" << seed_ << "\n";
  for (std::size_t i = 0; i < columns_.size(); ++i) {
    if (i) out << ',';
    out << columns_[i];
  }
  out << "\n";
  for (const auto& row : rows_) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out << ',';
      out << row[i];
    }
    out << "\n";
  }
  return out.str();
}

void CsvReport::save(const std::string& path) const { write_text_file(path, to_string()); }

std::string cell(double v) { return format_double(v); }
std::string cell(int v) { return std::to_string(v); }
std::string cell(uint64_t v) { return std::to_string(v); }

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot write file: " + path);
  f << content;
}

std::string read_text_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot read file: " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace emdsketch
