#include "hasm/recording.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

#include <json.hpp>

#include "hasm/error.hpp"

namespace hasm {
namespace {

using nlohmann::json;

constexpr const char* kFormat = "hasm-recording";

json record_to_json(const Record& r) {
  json joints = json::array();
  for (Eigen::Index j = 0; j < r.joints.size(); ++j) joints.push_back(r.joints[j]);
  json patches = json::array();
  for (const auto& p : r.patches) {
    json cells = json::array();
    for (const auto& c : p.cells) cells.push_back({{"f1", c.f1}, {"f2", c.f2}, {"f3", c.f3}});
    patches.push_back({{"id", p.id}, {"cells", cells}});
  }
  return {{"t", r.t}, {"episode", r.episode}, {"joints", joints}, {"patches", patches}};
}

Record record_from_json(const json& doc) {
  Record r;
  r.t = doc.at("t").get<double>();
  r.episode = doc.value("episode", std::uint32_t{0});
  const auto& joints = doc.at("joints");
  r.joints.resize(static_cast<Eigen::Index>(joints.size()));
  for (std::size_t j = 0; j < joints.size(); ++j) r.joints[static_cast<Eigen::Index>(j)] = joints[j].get<double>();
  for (const auto& p : doc.at("patches")) {
    PatchCells pc;
    pc.id = p.at("id").get<std::string>();
    for (const auto& c : p.at("cells")) {
      pc.cells.push_back({c.at("f1").get<double>(), c.at("f2").get<double>(), c.at("f3").get<double>()});
    }
    r.patches.push_back(std::move(pc));
  }
  return r;
}

}  // namespace

void Recording::validate() const {
  for (std::size_t i = 0; i < records.size(); ++i) {
    const Record& r = records[i];
    const std::string where = "recording record " + std::to_string(i);
    if (!std::isfinite(r.t)) fail(ErrorKind::data, where + ": non-finite timestamp");
    if (i > 0 && !(r.t > records[i - 1].t)) fail(ErrorKind::data, where + ": timestamps must strictly increase");
    if (static_cast<std::size_t>(r.joints.size()) != joints.size()) fail(ErrorKind::data, where + ": joint count");
    if (!r.joints.allFinite()) fail(ErrorKind::data, where + ": non-finite joint angle");
    if (r.patches.size() != patches.size()) fail(ErrorKind::data, where + ": patch count");
    for (std::size_t p = 0; p < patches.size(); ++p) {
      if (r.patches[p].id != patches[p]) fail(ErrorKind::data, where + ": patch order differs from header");
      if (r.patches[p].cells.empty()) fail(ErrorKind::data, where + ": patch without cells");
      for (const auto& c : r.patches[p].cells) {
        if (!std::isfinite(c.f1) || !std::isfinite(c.f2) || !std::isfinite(c.f3)) {
          fail(ErrorKind::data, where + ": non-finite force");
        }
      }
    }
  }
}

void write_recording(std::ostream& out, const Recording& rec) {
  rec.validate();
  json header = {{"format", kFormat},
                 {"version", kRecordingVersion},
                 {"joints", rec.joints},
                 {"patches", rec.patches},
                 {"tick_rate_hz", rec.tick_rate_hz}};
  out << header.dump() << '\n';
  for (const auto& r : rec.records) out << record_to_json(r).dump() << '\n';
  if (!out) fail(ErrorKind::io, "recording: write failed");
}

Recording read_recording(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) fail(ErrorKind::data, "recording: missing header line");
  Recording rec;
  try {
    const json header = json::parse(line);
    if (header.value("format", std::string{}) != kFormat) fail(ErrorKind::data, "recording: not a hasm recording");
    const int version = header.at("version").get<int>();
    if (version != kRecordingVersion) {
      fail(ErrorKind::data, "recording: unsupported version " + std::to_string(version));
    }
    rec.joints = header.at("joints").get<std::vector<std::string>>();
    rec.patches = header.at("patches").get<std::vector<std::string>>();
    rec.tick_rate_hz = header.at("tick_rate_hz").get<double>();
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty()) continue;
      try {
        rec.records.push_back(record_from_json(json::parse(line)));
      } catch (const json::exception& e) {
        fail(ErrorKind::data, "recording line " + std::to_string(lineno) + ": " + e.what());
      }
    }
  } catch (const json::exception& e) {
    fail(ErrorKind::data, std::string("recording header: ") + e.what());
  }
  rec.validate();
  return rec;
}

void save_recording(const std::filesystem::path& path, const Recording& rec) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::io, "cannot write recording " + path.string());
  write_recording(out, rec);
}

Recording load_recording(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::io, "cannot open recording " + path.string());
  return read_recording(in);
}

}  // namespace hasm
