#pragma once
// Run persistence: RFC-4180 CSV, JSON, and the run manifest (written last so
// its presence marks a complete run). All floats carry 17 significant digits.

#include <map>
#include <string>
#include <vector>

#include "poplab/grid.hpp"

namespace poplab {

std::string format_double(double v);  // 17 significant digits

// RFC-4180: CRLF rows, fields quoted when they contain comma/quote/newline.
void write_csv(const std::string& path,
               const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

// Columns x[,y],value.
void write_field_csv(const std::string& path, const Field& f);

struct RunManifest {
  std::string command;
  std::map<std::string, std::string> config_echo;
  std::uint64_t seed = 0;
  std::string timestamp;  // ISO-8601 UTC
  std::vector<std::string> artifact_paths;
  std::string versions;
};

std::string iso_timestamp_utc();

// Serializes to <dir>/manifest.json; call after every artifact is on disk.
void write_manifest(const std::string& dir, const RunManifest& man);

}  // namespace poplab
