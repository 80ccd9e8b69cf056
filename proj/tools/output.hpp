#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "prefpower/errors.hpp"
#include "prefpower/rng.hpp"

namespace prefpower::cli {

inline std::string fmt6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

inline std::string fmt3(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  return buf;
}

// Pads columns to their widest cell. Numeric-looking cells right-align.
inline std::string aligned_table(const std::vector<std::vector<std::string>>& rows) {
  if (rows.empty()) return "";
  std::vector<std::size_t> width;
  for (const auto& row : rows) {
    if (width.size() < row.size()) width.resize(row.size(), 0);
    for (std::size_t c = 0; c < row.size(); ++c)
      width[c] = std::max(width[c], row[c].size());
  }
  std::ostringstream out;
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      const bool numeric = !row[c].empty() && (std::isdigit(row[c][0]) || row[c][0] == '-' ||
                                               row[c][0] == '>' || row[c] == "---");
      const std::string pad(width[c] - row[c].size(), ' ');
      if (c) out << "  ";
      out << (numeric ? pad + row[c] : row[c] + pad);
    }
    out << '\n';
  }
  return out.str();
}

inline std::uint64_t file_digest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return fnv1a64(ss.str());
}

inline std::string hex64(std::uint64_t v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "0x%016llx", static_cast<unsigned long long>(v));
  return buf;
}

// Record of one resolved invocation. Identical manifests promise byte-
// identical outputs, so nothing time- or host-dependent belongs here.
class RunManifest {
 public:
  RunManifest(std::string subcommand, std::string version)
      : subcommand_(std::move(subcommand)), version_(std::move(version)) {}

  template <typename T>
  void param(const std::string& key, const T& value) {
    params_[key] = value;
  }
  void input(const std::string& path) {
    inputs_.push_back({{"path", path}, {"fnv1a64", hex64(file_digest(path))}});
  }
  void seed(std::uint64_t s) { seed_ = s; }

  nlohmann::json json() const {
    nlohmann::json j;
    j["tool"] = "prefpower";
    j["version"] = version_;
    j["subcommand"] = subcommand_;
    j["parameters"] = params_;
    if (seed_) j["seed"] = *seed_;
    j["inputs"] = inputs_;
    return j;
  }

  // Sidecar next to an output file.
  void write_for(const std::string& out_path) const {
    std::ofstream out(out_path + ".manifest.json");
    out << json().dump(2) << '\n';
  }

 private:
  std::string subcommand_;
  std::string version_;
  nlohmann::json params_ = nlohmann::json::object();
  nlohmann::json inputs_ = nlohmann::json::array();
  std::optional<std::uint64_t> seed_;
};

}  // namespace prefpower::cli
