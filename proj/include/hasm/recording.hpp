#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "hasm/placecode.hpp"
#include "hasm/tactile.hpp"

namespace hasm {

inline constexpr int kRecordingVersion = 1;

struct PatchCells {
  std::string id;
  std::vector<CellForces> cells;
};

struct Record {
  double t = 0.0;
  std::uint32_t episode = 0;  // training never links records across episodes
  JointAngles joints;
  std::vector<PatchCells> patches;
};

// Line-delimited JSON: one header line, then one record per line.
struct Recording {
  std::vector<std::string> joints;
  std::vector<std::string> patches;
  double tick_rate_hz = 50.0;
  std::vector<Record> records;

  // Throws ErrorKind::data on non-increasing timestamps or schema drift.
  void validate() const;
};

void write_recording(std::ostream& out, const Recording& rec);
Recording read_recording(std::istream& in);

void save_recording(const std::filesystem::path& path, const Recording& rec);
Recording load_recording(const std::filesystem::path& path);

}  // namespace hasm
