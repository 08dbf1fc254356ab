// Copyright 2026 The smoothfix Authors.
// SPDX-License-Identifier: Apache-2.0

// Output plumbing for the command-line runner: config hashing, output
// directory resolution, CSV and JSON writers that stamp every file with the
// config hash and seed.
#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <string>
#include <string_view>
#include <vector>

namespace smoothfix::cli {

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view bytes) noexcept;
std::string hex64(std::uint64_t value);

/// Environment variable naming the default output directory.
inline constexpr const char* kOutDirEnv = "SMOOTHFIX_OUT_DIR";

/// `flag` if non-empty, else $SMOOTHFIX_OUT_DIR, else ".".
std::filesystem::path resolve_out_dir(const std::string& flag);

struct OutputContext {
  std::filesystem::path dir;
  std::string config_hash;
  std::uint64_t seed = 0;

  /// `name` inside dir; an absolute `name` is used as is.
  std::filesystem::path file(std::string_view name) const { return dir / std::string(name); }
};

/// RFC 4180 field quoting: fields containing a comma, quote, CR or LF are
/// wrapped in quotes with inner quotes doubled.
std::string csv_field(std::string_view field);
std::string format_double(double value);

class CsvWriter {
 public:
  CsvWriter(const OutputContext& ctx, std::string_view name, const std::vector<std::string>& columns);
  void row(const std::vector<std::string>& fields);
  const std::filesystem::path& path() const noexcept { return path_; }

 private:
  std::filesystem::path path_;
  std::ofstream out_;
};

/// JSON object with config_hash and seed as the first two members.
nlohmann::ordered_json stamped_json(const OutputContext& ctx);
std::filesystem::path write_json(const OutputContext& ctx, std::string_view name, const nlohmann::ordered_json& doc);

/// Reads one column of numbers, skipping '#' comment lines and a header row.
/// A CSV with several columns is read from the column named `column`, or the
/// first column when `column` is empty. A leading `index` column, as written
/// by this program, is skipped.
std::vector<double> read_samples(const std::filesystem::path& path, const std::string& column = "");

/// Comma-separated doubles.
std::vector<double> parse_double_list(std::string_view text);

}  // namespace smoothfix::cli
