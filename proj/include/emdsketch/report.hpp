#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace emdsketch {

// CSV with a fixed header row; every report embeds the tool version, the
// config hash and the root seed so a run can be reproduced from its output.
class CsvReport {
 public:
  CsvReport(std::vector<std::string> columns, std::string config_json, uint64_t seed);

  void add_row(const std::vector<std::string>& cells);
  std::string to_string() const;
  void save(const std::string& path) const;

 private:
  std::vector<std::string> columns_;
  std::vector<std::vector<std::string>> rows_;
  std::string config_json_;
  uint64_t config_hash_;
  uint64_t seed_;
};

uint64_t config_hash(const std::string& config_json);

std::string cell(double v);
std::string cell(int v);
std::string cell(uint64_t v);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace emdsketch
