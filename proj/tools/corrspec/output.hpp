#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

namespace cli {

std::string sha256_hex(const std::string &bytes);

/// CSV table: a schema comment line, a header row, then rows with numbers
/// printed to 9 significant digits.
class CsvTable {
public:
  CsvTable(std::string schema, std::vector<std::string> columns);

  CsvTable &row();
  CsvTable &add(double value);
  CsvTable &add(std::uint64_t value);
  CsvTable &add(int value);

  std::string str() const;

private:
  std::string schema_;
  std::vector<std::string> columns_;
  std::vector<std::vector<std::string>> rows_;
};

/// Writes the files of one command run and its manifest.
class RunOutput {
public:
  RunOutput(std::filesystem::path dir, std::string command);

  void write(const std::string &name, const std::string &content);
  void write_json(const std::string &name, const nlohmann::json &value);
  void write_csv(const std::string &name, const CsvTable &table);

  /// `<command>.manifest.json` listing every file written so far.
  void finish(const nlohmann::json &scenario, std::uint64_t seed, bool timestamps,
              const std::string &started_utc);

private:
  std::filesystem::path dir_;
  std::string command_;
  nlohmann::json files_ = nlohmann::json::array();
};

std::string read_file(const std::filesystem::path &path);
std::string utc_now();

} // namespace cli
