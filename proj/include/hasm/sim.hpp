#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "hasm/config.hpp"
#include "hasm/recording.hpp"
#include "hasm/tactile.hpp"

namespace hasm {

struct TouchEvent {
  std::string patch_id;
  double magnitude = 0.0;  // N
  double start = 0.0;      // s
  double duration = 0.0;   // s
};

using TouchScript = std::vector<TouchEvent>;

// Summed magnitude per configured patch of the events active at t
// (start <= t < start + duration).
std::vector<double> touch_magnitudes(const TouchScript& script, const AppConfig& config, double t);

// Kinematic arm with virtual skin patches. Time advances one tick period per
// tick(); the noise generator is the only source of randomness.
class World {
 public:
  World(const AppConfig& config, std::uint64_t seed);

  void reset(const JointAngles& angles);
  void set_angles(const JointAngles& angles);

  // Moves every joint toward the command by at most max_velocity * dt and
  // clamps to its limits; no command leaves the joints where they are.
  void tick(const std::optional<JointAngles>& command);

  // One frame per configured patch at the current time. Each force component
  // of each cell carries magnitude / (3 * cells) plus N(0, touch_noise).
  std::vector<PatchFrame> sense(std::span<const double> magnitudes);

  double time() const { return static_cast<double>(ticks_) * dt_; }
  std::uint64_t ticks() const { return ticks_; }
  double dt() const { return dt_; }
  const JointAngles& angles() const { return angles_; }
  const AppConfig& config() const { return config_; }

 private:
  AppConfig config_;
  double dt_;
  JointAngles angles_;
  std::uint64_t ticks_ = 0;
  std::mt19937_64 rng_;
  std::normal_distribution<double> noise_;
};

Record make_record(double t, std::uint32_t episode, const JointAngles& angles, std::span<const PatchFrame> frames);
Recording empty_recording(const AppConfig& config);

struct TouchSegment {
  double magnitude = 0.0;  // N
  double duration = 0.0;   // s
};

using TouchProfile = std::vector<TouchSegment>;

struct SweepSpec {
  std::string joint;
  int direction = -1;  // -1 sweeps max -> min
  std::string patch;
  TouchProfile profile;
  std::optional<JointAngles> start;  // default: home pose with the joint at its starting limit
};

// Appends one episode: each tick the joint moves by direction * gain * m(t) * dt
// until the far limit is reached or the profile runs out.
void scripted_sweep(const AppConfig& config, const SweepSpec& spec, std::uint64_t seed, Recording& out,
                    std::uint32_t episode = 0, double t0 = 0.0);

struct SequenceSpec {
  std::vector<JointAngles> waypoints;
  std::size_t segment_ticks = 13;
  std::string patch;
  double magnitude = 8.0;
};

// Linear interpolation through the waypoints, segment_ticks records per
// segment plus the final waypoint, with constant touch on spec.patch.
void scripted_sequence(const AppConfig& config, const SequenceSpec& spec, std::uint64_t seed, Recording& out,
                       std::uint32_t episode = 0, double t0 = 0.0);

std::vector<JointAngles> interpolate_waypoints(std::span<const JointAngles> waypoints, std::size_t segment_ticks);

}  // namespace hasm
