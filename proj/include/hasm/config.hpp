#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "hasm/encoder.hpp"

namespace hasm {

struct MemoryConfig {
  double beta = 32.0;
  double max_pair_gap = 0.05;  // s
};

struct SimConfig {
  double touch_noise = 0.1;        // N, per force component
  double sweep_speed_gain = 0.05;  // rad/s per N
};

struct AppConfig {
  std::vector<JointSpec> joints;
  std::vector<PatchSpec> patches;
  PlaceCodeConfig place;
  TactileConfig tactile;
  MemoryConfig memory;
  SimConfig sim;
  double tick_rate_hz = 50.0;
  std::uint64_t seed = 0;

  double tick_period() const { return 1.0 / tick_rate_hz; }
  EncoderConfig encoder() const;
  std::vector<JointLimits> limits() const;
  JointAngles home() const;  // midpoint of every joint range

  std::size_t joint_index(const std::string& name) const;
  std::size_t patch_index(const std::string& id) const;
  const PatchSpec& patch(const std::string& id) const;

  // Throws ErrorKind::config on any invalid value, including an encoder
  // dimension not divisible by 3.
  void validate() const;
};

// Three joints (lift, flex, roll) and four wrist patches.
AppConfig default_config();

AppConfig config_from_json(const nlohmann::json& doc);
nlohmann::json config_to_json(const AppConfig& config);
AppConfig load_config(const std::filesystem::path& path);

nlohmann::json encoder_to_json(const EncoderConfig& encoder);
EncoderConfig encoder_from_json(const nlohmann::json& doc);
nlohmann::json patch_to_json(const PatchSpec& patch);
PatchSpec patch_from_json(const nlohmann::json& doc);

}  // namespace hasm
