#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "polaron/common.hpp"

namespace polaron {

using json = nlohmann::json;

// Atomic write: contents land under the final name only when complete.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  std::filesystem::create_directories(path.parent_path().empty() ? "." : path.parent_path());
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("write_file_atomic: cannot open " + tmp.string());
    os << contents;
    if (!os) throw std::runtime_error("write_file_atomic: write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

// CSV with a header row, comma separation, 12 significant digits.
inline std::string csv_format(const std::vector<std::string>& header,
                              const std::vector<std::vector<double>>& rows) {
  std::ostringstream os;
  for (std::size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << header[i];
  os << "\n";
  char buf[40];
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      std::snprintf(buf, sizeof(buf), "%.12g", row[i]);
      os << (i ? "," : "") << buf;
    }
    os << "\n";
  }
  return os.str();
}

inline void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
                      const std::vector<std::vector<double>>& rows) {
  write_file_atomic(path, csv_format(header, rows));
}

struct AcceptanceCheck {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct RunManifest {
  std::string experiment;
  json config;
  std::string version = kVersion;
  double wall_time_s = 0.0;
  std::vector<std::string> outputs;
  std::vector<AcceptanceCheck> checks;

  json to_json() const {
    json j;
    j["experiment"] = experiment;
    j["config"] = config;
    j["version"] = version;
    j["wall_time_s"] = wall_time_s;
    j["outputs"] = outputs;
    j["acceptance_checks"] = json::array();
    for (const auto& c : checks)
      j["acceptance_checks"].push_back({{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
    return j;
  }
};

inline void write_manifest(const std::filesystem::path& dir, const RunManifest& m) {
  write_file_atomic(dir / "manifest.json", m.to_json().dump(2) + "\n");
}

}  // namespace polaron
