// Copyright 2026 The smoothfix Authors.
// SPDX-License-Identifier: Apache-2.0

#include "config.hpp"

#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "smoothfix/error.hpp"

namespace smoothfix::cli {
namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  fields.push_back(cur);
  return fields;
}

bool parse_double(std::string_view text, double& out) {
  while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
  while (!text.empty() && text.back() == ' ') text.remove_suffix(1);
  if (text.empty()) return false;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc() && ptr == text.data() + text.size();
}

}  // namespace

std::uint64_t fnv1a64(std::string_view bytes) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string hex64(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
  return buf;
}

std::filesystem::path resolve_out_dir(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv(kOutDirEnv); env && *env) return env;
  return ".";
}

std::string csv_field(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string format_double(double value) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return ec == std::errc() ? std::string(buf, ptr) : std::string("nan");
}

CsvWriter::CsvWriter(const OutputContext& ctx, std::string_view name, const std::vector<std::string>& columns)
    : path_(ctx.file(name)) {
  std::error_code ec;
  if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path(), ec);
  out_.open(path_, std::ios::binary | std::ios::trunc);
  if (!out_) throw ResourceError("cannot write " + path_.string());
  out_ << "# config_hash=" << ctx.config_hash << ",seed=" << ctx.seed << "\r\n";
  row(columns);
}

void CsvWriter::row(const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out_ << ',';
    out_ << csv_field(fields[i]);
  }
  out_ << "\r\n";
  if (!out_) throw ResourceError("failed writing " + path_.string());
}

nlohmann::ordered_json stamped_json(const OutputContext& ctx) {
  nlohmann::ordered_json doc;
  doc["config_hash"] = ctx.config_hash;
  doc["seed"] = ctx.seed;
  return doc;
}

std::filesystem::path write_json(const OutputContext& ctx, std::string_view name, const nlohmann::ordered_json& doc) {
  std::error_code ec;
  std::filesystem::create_directories(ctx.dir, ec);
  const auto path = ctx.file(name);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ResourceError("cannot write " + path.string());
  out << doc.dump(2) << '\n';
  if (!out) throw ResourceError("failed writing " + path.string());
  return path;
}

std::vector<double> read_samples(const std::filesystem::path& path, const std::string& column) {
  std::ifstream in(path);
  if (!in) throw ResourceError("cannot read " + path.string());
  std::vector<double> out;
  std::string line;
  std::size_t col = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const auto fields = split_csv_line(line);
    double v = 0.0;
    if (!header_seen) {
      header_seen = true;
      if (!parse_double(fields[0], v) || !column.empty()) {
        if (!column.empty()) {
          bool found = false;
          for (std::size_t i = 0; i < fields.size(); ++i) {
            if (fields[i] == column) {
              col = i;
              found = true;
            }
          }
          if (!found) throw InvalidArgument("column '" + column + "' not found in " + path.string());
        } else if (fields.size() > 1 && fields[0] == "index") {
          col = 1;
        }
        continue;
      }
    }
    if (col >= fields.size() || !parse_double(fields[col], v))
      throw InvalidArgument("non-numeric sample '" + line + "' in " + path.string());
    out.push_back(v);
  }
  if (out.empty()) throw InvalidArgument("no samples in " + path.string());
  return out;
}

std::vector<double> parse_double_list(std::string_view text) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto end = text.find(',', start);
    const auto piece = text.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start);
    double v = 0.0;
    if (!parse_double(piece, v)) throw InvalidArgument("not a number: '" + std::string(piece) + "'");
    out.push_back(v);
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
  return out;
}

}  // namespace smoothfix::cli
