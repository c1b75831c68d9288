#pragma once

// CSV and JSON output. CSVs carry a one-line schema comment, a header row,
// '.' decimals with 17 significant digits and LF line endings, so identical
// inputs give byte-identical files on any platform.

#include <nlohmann/json.hpp>

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <system_error>
#include <vector>

namespace btckur::io {

inline constexpr int kCsvSchemaVersion = 1;

inline std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  if (ec != std::errc()) throw std::runtime_error("format_double: conversion failed");
  return std::string(buf, ptr);
}

/// One CSV cell: a number, or an empty field for an absent quantity.
using Cell = std::optional<double>;

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::string& schema, const std::vector<std::string>& columns)
      : path_(path), out_(path, std::ios::binary), width_(columns.size()) {
    if (!out_) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out_ << "# btckur " << schema << " v" << kCsvSchemaVersion << '\n';
    for (size_t i = 0; i < columns.size(); ++i) out_ << (i ? "," : "") << columns[i];
    out_ << '\n';
  }

  void row(const std::vector<Cell>& cells) {
    if (cells.size() != width_) throw std::logic_error("CsvWriter: row width mismatch in " + path_.string());
    for (size_t i = 0; i < cells.size(); ++i) {
      if (i) out_ << ',';
      if (cells[i]) out_ << format_double(*cells[i]);
    }
    out_ << '\n';
  }

  /// Row with a leading unsigned integer (seeds, N values).
  void row(std::uint64_t key, const std::vector<Cell>& cells) {
    if (cells.size() + 1 != width_) throw std::logic_error("CsvWriter: row width mismatch in " + path_.string());
    out_ << key;
    for (const auto& c : cells) {
      out_ << ',';
      if (c) out_ << format_double(*c);
    }
    out_ << '\n';
  }

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  std::ofstream out_;
  size_t width_;
};

/// Writes JSON to `path` via a temporary file and rename.
inline void write_json_atomic(const std::filesystem::path& path, const nlohmann::json& j) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    out << j.dump(2) << '\n';
  }
  std::filesystem::rename(tmp, path);
}

/// 64-bit FNV-1a, used as a content hash of run inputs.
inline std::uint64_t fnv1a(const std::string& data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i, v >>= 4) s[i] = digits[v & 0xF];
  return s;
}

}  // namespace btckur::io
