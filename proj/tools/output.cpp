#include "output.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "cli.hpp"
#include "rnet/errors.hpp"

namespace rnet::cli {

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t value) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i) {
    s[static_cast<std::size_t>(i)] = digits[value & 0xf];
    value >>= 4;
  }
  return s;
}

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
  if (ec != std::errc{}) throw std::runtime_error("format_number: conversion failed");
  return std::string(buf, end);
}

void Table::add_row(const std::vector<double>& values) {
  std::vector<std::string> cells;
  cells.reserve(values.size());
  for (double v : values) cells.push_back(format_number(v));
  add_row(std::move(cells));
}

void Table::add_row(std::vector<std::string> cells) {
  if (cells.size() != columns_.size()) throw std::logic_error("Table: row width does not match header");
  rows_.push_back(std::move(cells));
}

namespace {

std::ofstream open_output(const std::filesystem::path& path) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError("cannot write " + path.string());
  return out;
}

}  // namespace

void write_csv(const std::filesystem::path& path, const RunHeader& header, const Table& table) {
  auto out = open_output(path);
  out << "# tool: rnet " << kToolVersion << "\n";
  out << "# command: " << header.command << "\n";
  out << "# config_hash: " << header.config_hash() << "\n";
  for (std::size_t i = 0; i < table.columns().size(); ++i) out << (i ? "," : "") << table.columns()[i];
  out << "\n";
  for (const auto& row : table.rows()) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
    out << "\n";
  }
}

void write_summary(const std::filesystem::path& path, const RunHeader& header, const json& body) {
  json doc = body;
  doc["tool"] = "rnet";
  doc["version"] = kToolVersion;
  doc["command"] = header.command;
  doc["config_hash"] = header.config_hash();
  doc["config"] = header.config;
  auto out = open_output(path);
  out << doc.dump(2) << "\n";
}

}  // namespace rnet::cli
