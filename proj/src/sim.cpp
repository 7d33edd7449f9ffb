#include "hasm/sim.hpp"

#include <algorithm>
#include <cmath>

#include "hasm/error.hpp"

namespace hasm {

std::vector<double> touch_magnitudes(const TouchScript& script, const AppConfig& config, double t) {
  std::vector<double> out(config.patches.size(), 0.0);
  for (const auto& ev : script) {
    if (t + 1e-9 >= ev.start && t + 1e-9 < ev.start + ev.duration) out[config.patch_index(ev.patch_id)] += ev.magnitude;
  }
  return out;
}

World::World(const AppConfig& config, std::uint64_t seed)
    : config_(config), dt_(config.tick_period()), angles_(config.home()), rng_(seed),
      noise_(0.0, config.sim.touch_noise > 0.0 ? config.sim.touch_noise : 1.0) {
  config_.validate();
}

void World::reset(const JointAngles& angles) {
  set_angles(angles);
  ticks_ = 0;
}

void World::set_angles(const JointAngles& angles) {
  if (static_cast<std::size_t>(angles.size()) != config_.joints.size()) {
    fail(ErrorKind::dimension, "world: joint count mismatch");
  }
  angles_ = angles;
  for (std::size_t j = 0; j < config_.joints.size(); ++j) {
    const auto idx = static_cast<Eigen::Index>(j);
    angles_[idx] = config_.joints[j].limits.clamp(angles_[idx]);
  }
}

void World::tick(const std::optional<JointAngles>& command) {
  if (command) {
    if (command->size() != angles_.size()) fail(ErrorKind::dimension, "world: command joint count mismatch");
    for (std::size_t j = 0; j < config_.joints.size(); ++j) {
      const auto idx = static_cast<Eigen::Index>(j);
      const JointSpec& spec = config_.joints[j];
      const double max_step = spec.max_velocity * dt_;
      const double step = std::clamp((*command)[idx] - angles_[idx], -max_step, max_step);
      angles_[idx] = spec.limits.clamp(angles_[idx] + step);
    }
  }
  ++ticks_;
}

std::vector<PatchFrame> World::sense(std::span<const double> magnitudes) {
  if (magnitudes.size() != config_.patches.size()) fail(ErrorKind::dimension, "world: one magnitude per patch");
  const bool noisy = config_.sim.touch_noise > 0.0;
  std::vector<PatchFrame> frames;
  frames.reserve(config_.patches.size());
  for (std::size_t p = 0; p < config_.patches.size(); ++p) {
    const PatchSpec& spec = config_.patches[p];
    PatchFrame f;
    f.timestamp = time();
    f.patch_id = spec.id;
    f.axis = spec.axis;
    f.theta_sign = spec.theta_sign;
    const double share = std::max(0.0, magnitudes[p]) / (3.0 * static_cast<double>(spec.cells));
    f.cells.resize(spec.cells);
    for (auto& c : f.cells) {
      c.f1 = share + (noisy ? noise_(rng_) : 0.0);
      c.f2 = share + (noisy ? noise_(rng_) : 0.0);
      c.f3 = share + (noisy ? noise_(rng_) : 0.0);
    }
    frames.push_back(std::move(f));
  }
  return frames;
}

Record make_record(double t, std::uint32_t episode, const JointAngles& angles, std::span<const PatchFrame> frames) {
  Record r;
  r.t = t;
  r.episode = episode;
  r.joints = angles;
  for (const auto& f : frames) r.patches.push_back({f.patch_id, f.cells});
  return r;
}

Recording empty_recording(const AppConfig& config) {
  Recording rec;
  for (const auto& j : config.joints) rec.joints.push_back(j.name);
  for (const auto& p : config.patches) rec.patches.push_back(p.id);
  rec.tick_rate_hz = config.tick_rate_hz;
  return rec;
}

void scripted_sweep(const AppConfig& config, const SweepSpec& spec, std::uint64_t seed, Recording& out,
                    std::uint32_t episode, double t0) {
  if (spec.direction != 1 && spec.direction != -1) fail(ErrorKind::invalid_argument, "sweep: direction must be +-1");
  const std::size_t joint = config.joint_index(spec.joint);
  const std::size_t patch = config.patch_index(spec.patch);
  const JointLimits lim = config.joints[joint].limits;
  const auto jidx = static_cast<Eigen::Index>(joint);

  World world(config, seed);
  JointAngles start = spec.start.value_or(config.home());
  if (!spec.start) start[jidx] = spec.direction < 0 ? lim.max : lim.min;
  world.reset(start);
  const double far = spec.direction < 0 ? lim.min : lim.max;

  double profile_end = 0.0;
  for (const auto& seg : spec.profile) profile_end += seg.duration;
  std::vector<double> mags(config.patches.size(), 0.0);
  while (true) {
    const double t = world.time();
    if (t >= profile_end - 1e-9) break;
    double m = 0.0;
    double edge = 0.0;
    for (const auto& seg : spec.profile) {
      edge += seg.duration;
      if (t < edge - 1e-9) {
        m = seg.magnitude;
        break;
      }
    }
    mags[patch] = m;
    const auto frames = world.sense(mags);
    out.records.push_back(make_record(t0 + t, episode, world.angles(), frames));
    if (world.angles()[jidx] == far) break;
    JointAngles cmd = world.angles();
    cmd[jidx] = lim.clamp(cmd[jidx] + spec.direction * config.sim.sweep_speed_gain * m * world.dt());
    world.tick(cmd);
  }
}

std::vector<JointAngles> interpolate_waypoints(std::span<const JointAngles> waypoints, std::size_t segment_ticks) {
  if (waypoints.size() < 2) fail(ErrorKind::invalid_argument, "sequence: at least two waypoints are required");
  if (segment_ticks == 0) fail(ErrorKind::invalid_argument, "sequence: segment_ticks must be positive");
  std::vector<JointAngles> states;
  for (std::size_t s = 0; s + 1 < waypoints.size(); ++s) {
    if (waypoints[s].size() != waypoints[s + 1].size()) fail(ErrorKind::dimension, "sequence: waypoint sizes differ");
    for (std::size_t k = 0; k < segment_ticks; ++k) {
      const double frac = static_cast<double>(k) / static_cast<double>(segment_ticks);
      states.push_back(waypoints[s] + (waypoints[s + 1] - waypoints[s]) * frac);
    }
  }
  states.push_back(waypoints.back());
  return states;
}

void scripted_sequence(const AppConfig& config, const SequenceSpec& spec, std::uint64_t seed, Recording& out,
                       std::uint32_t episode, double t0) {
  const std::size_t patch = config.patch_index(spec.patch);
  for (const auto& w : spec.waypoints) {
    if (static_cast<std::size_t>(w.size()) != config.joints.size()) {
      fail(ErrorKind::dimension, "sequence: waypoint joint count mismatch");
    }
    for (std::size_t j = 0; j < config.joints.size(); ++j) {
      if (!config.joints[j].limits.contains(w[static_cast<Eigen::Index>(j)])) {
        fail(ErrorKind::invalid_argument, "sequence: waypoint outside joint limits");
      }
    }
  }
  const auto states = interpolate_waypoints(spec.waypoints, spec.segment_ticks);
  World world(config, seed);
  std::vector<double> mags(config.patches.size(), 0.0);
  mags[patch] = spec.magnitude;
  world.reset(states.front());
  for (const auto& s : states) {
    world.set_angles(s);
    const auto frames = world.sense(mags);
    out.records.push_back(make_record(t0 + world.time(), episode, world.angles(), frames));
    world.tick(std::nullopt);
  }
}

}  // namespace hasm
