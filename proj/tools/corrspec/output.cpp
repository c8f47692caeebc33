#include "output.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>

#include <openssl/evp.h>

#include "corrspec/corrspec.h"
#include "support.hpp"

namespace cli {

std::string sha256_hex(const std::string &bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &length, EVP_sha256(), nullptr) != 1)
    throw InternalError("sha256 digest failed");
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < length; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xF]);
  }
  return out;
}

CsvTable::CsvTable(std::string schema, std::vector<std::string> columns)
    : schema_(std::move(schema)), columns_(std::move(columns)) {}

CsvTable &CsvTable::row() {
  rows_.emplace_back();
  return *this;
}

CsvTable &CsvTable::add(double value) {
  if (!std::isfinite(value)) {
    rows_.back().push_back(std::isnan(value) ? "nan" : (value > 0 ? "inf" : "-inf"));
    return *this;
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", value);
  rows_.back().push_back(buf);
  return *this;
}

CsvTable &CsvTable::add(std::uint64_t value) {
  rows_.back().push_back(std::to_string(value));
  return *this;
}

CsvTable &CsvTable::add(int value) {
  rows_.back().push_back(std::to_string(value));
  return *this;
}

std::string CsvTable::str() const {
  std::ostringstream out;
  out << "# schema: " << schema_ << "\n";
  for (std::size_t i = 0; i < columns_.size(); ++i)
    out << (i ? "," : "") << columns_[i];
  out << "\n";
  for (const auto &r : rows_) {
    for (std::size_t i = 0; i < r.size(); ++i)
      out << (i ? "," : "") << r[i];
    out << "\n";
  }
  return out.str();
}

RunOutput::RunOutput(std::filesystem::path dir, std::string command)
    : dir_(std::move(dir)), command_(std::move(command)) {
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  if (ec)
    throw IoError("cannot create output directory '" + dir_.string() + "': " + ec.message());
}

void RunOutput::write(const std::string &name, const std::string &content) {
  const auto path = dir_ / name;
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << content;
  out.close();
  if (!out)
    throw IoError("cannot write '" + path.string() + "'");
  files_.push_back({{"path", name}, {"bytes", content.size()}, {"sha256", sha256_hex(content)}});
}

void RunOutput::write_json(const std::string &name, const nlohmann::json &value) {
  write(name, value.dump(2) + "\n");
}

void RunOutput::write_csv(const std::string &name, const CsvTable &table) {
  write(name, table.str());
}

void RunOutput::finish(const nlohmann::json &scenario, std::uint64_t seed, bool timestamps,
                       const std::string &started_utc) {
  nlohmann::json manifest{{"command", command_},
                          {"tool", "corrspec"},
                          {"version", csp_version()},
                          {"seed", seed},
                          {"scenario_sha256", sha256_hex(scenario.dump())},
                          {"files", files_}};
  if (timestamps)
    manifest["timestamps"] = {{"started_utc", started_utc}, {"finished_utc", utc_now()}};
  const auto path = dir_ / (command_ + ".manifest.json");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << manifest.dump(2) << "\n";
  out.close();
  if (!out)
    throw IoError("cannot write '" + path.string() + "'");
}

std::string read_file(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw IoError("cannot read '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

} // namespace cli
