#include "poplab/io.hpp"

#include <cstdio>
#include <ctime>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace poplab {

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::ofstream open_or_throw(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  return out;
}

}  // namespace

void write_csv(const std::string& path,
               const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
  std::ofstream out = open_or_throw(path);
  auto emit = [&](const std::vector<std::string>& row) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out << ',';
      out << csv_field(row[i]);
    }
    out << "\r\n";
  };
  emit(header);
  for (const auto& r : rows) emit(r);
}

void write_field_csv(const std::string& path, const Field& f) {
  const Grid& g = f.grid();
  std::vector<std::vector<std::string>> rows;
  rows.reserve(g.node_count());
  for (std::size_t i = 0; i < g.node_count(); ++i) {
    if (g.dim() == 1)
      rows.push_back({format_double(g.x(i)), format_double(f[i])});
    else
      rows.push_back({format_double(g.x(i)), format_double(g.y(i)),
                      format_double(f[i])});
  }
  std::vector<std::string> header =
      g.dim() == 1 ? std::vector<std::string>{"x", "value"}
                   : std::vector<std::string>{"x", "y", "value"};
  write_csv(path, header, rows);
}

std::string iso_timestamp_utc() {
  std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_manifest(const std::string& dir, const RunManifest& man) {
  nlohmann::json j;
  j["command"] = man.command;
  j["config"] = man.config_echo;
  j["seed"] = man.seed;
  j["timestamp"] = man.timestamp;
  j["artifacts"] = man.artifact_paths;
  j["versions"] = man.versions;
  std::ofstream out = open_or_throw(dir + "/manifest.json");
  out << j.dump(2) << "\n";
}

}  // namespace poplab
