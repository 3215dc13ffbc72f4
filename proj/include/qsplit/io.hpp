#pragma once

#include <charconv>
#include <chrono>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "qsplit/core.hpp"

namespace qsplit {

inline constexpr const char* kToolVersion = "1.0.0";

using Json = nlohmann::ordered_json;

/// Shortest decimal text that parses back to the same double.
inline std::string fmt_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

/// Comma-separated, header row, LF line endings.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header)
      : path_(path), os_(path, std::ios::binary) {
    require(os_.good(), "io.open", "cannot open " + path.string() + " for writing");
    row_strings(header);
  }

  void row(const std::vector<double>& values) {
    std::vector<std::string> s;
    s.reserve(values.size());
    for (double v : values) s.push_back(fmt_double(v));
    row_strings(s);
  }

  void row_strings(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) os_ << ',';
      os_ << cells[i];
    }
    os_ << '\n';
  }

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  std::ofstream os_;
};

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

inline CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  require(is.good(), "io.open", "cannot read " + path.string());
  CsvTable t;
  std::string line;
  if (std::getline(is, line)) t.header = split_csv_line(line);
  while (std::getline(is, line))
    if (!line.empty()) t.rows.push_back(split_csv_line(line));
  return t;
}

inline void write_text_atomic(const std::filesystem::path& path, const std::string& text) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary);
    require(os.good(), "io.open", "cannot open " + tmp.string() + " for writing");
    os << text;
    require(os.good(), "io.write", "write to " + tmp.string() + " failed");
  }
  std::filesystem::rename(tmp, path);
}

inline void write_json(const std::filesystem::path& path, const Json& j) {
  write_text_atomic(path, j.dump(2) + "\n");
}

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

/// Hash of the canonical (key-sorted, compact) serialization.
inline std::string config_hash(const Json& resolved) {
  const nlohmann::json canonical = nlohmann::json::parse(resolved.dump());
  return hex64(fnv1a64(canonical.dump()));
}

struct RunManifest {
  std::string command;
  std::string config_hash;
  std::optional<std::uint64_t> seed;
  std::string tool_version = kToolVersion;
  std::string started_utc;
  double wall_clock_seconds = 0.0;
  std::vector<std::string> files;

  Json to_json() const {
    Json j;
    j["command"] = command;
    j["config_hash"] = config_hash;
    j["seed"] = seed ? Json(*seed) : Json(nullptr);
    j["tool_version"] = tool_version;
    j["started_utc"] = started_utc;
    j["wall_clock_seconds"] = wall_clock_seconds;
    j["files"] = files;
    return j;
  }
};

inline std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline void write_manifest(const std::filesystem::path& dir, const RunManifest& m) {
  write_json(dir / "manifest.json", m.to_json());
}

}  // namespace qsplit
