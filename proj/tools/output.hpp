#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

namespace rnet::cli {

using json = nlohmann::json;

std::uint64_t fnv1a(const std::string& bytes);
std::string hex64(std::uint64_t value);

/// Shortest decimal that reads back to the same double.
std::string format_number(double value);

class Table {
 public:
  explicit Table(std::vector<std::string> columns) : columns_(std::move(columns)) {}

  void add_row(const std::vector<double>& values);
  void add_row(std::vector<std::string> cells);

  const std::vector<std::string>& columns() const noexcept { return columns_; }
  const std::vector<std::vector<std::string>>& rows() const noexcept { return rows_; }

 private:
  std::vector<std::string> columns_;
  std::vector<std::vector<std::string>> rows_;
};

/// Metadata shared by every file written for one run.
struct RunHeader {
  std::string command;
  json config;

  std::string config_hash() const { return hex64(fnv1a(config.dump())); }
};

/// '#'-prefixed metadata lines, header row, one line per row; LF endings.
void write_csv(const std::filesystem::path& path, const RunHeader& header, const Table& table);

/// {tool, version, command, config_hash, config, ...body}
void write_summary(const std::filesystem::path& path, const RunHeader& header, const json& body);

}  // namespace rnet::cli
