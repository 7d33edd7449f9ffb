#include "hasm/config.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include "hasm/error.hpp"

namespace hasm {
namespace {

using nlohmann::json;

// Reads doc[key] into out when present; type errors become config errors.
template <typename T>
void read_opt(const json& doc, const char* key, T& out) {
  auto it = doc.find(key);
  if (it == doc.end()) return;
  try {
    out = it->get<T>();
  } catch (const json::exception& e) {
    fail(ErrorKind::config, std::string("config: bad value for '") + key + "': " + e.what());
  }
}

const json& require(const json& doc, const char* key) {
  auto it = doc.find(key);
  if (it == doc.end()) fail(ErrorKind::config, std::string("config: missing '") + key + "'");
  return *it;
}

void require_object(const json& doc, const char* what) {
  if (!doc.is_object()) fail(ErrorKind::config, std::string("config: '") + what + "' must be an object");
}

json vec3_to_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

Vec3 vec3_from_json(const json& doc) {
  if (!doc.is_array() || doc.size() != 3) fail(ErrorKind::config, "config: axis must be a 3-element array");
  try {
    return {doc[0].get<double>(), doc[1].get<double>(), doc[2].get<double>()};
  } catch (const json::exception& e) {
    fail(ErrorKind::config, std::string("config: bad axis: ") + e.what());
  }
}

json tactile_to_json(const TactileConfig& t) {
  return {{"soft_threshold", t.soft_threshold},
          {"accumulation_window", t.accumulation_window},
          {"gain", t.gain},
          {"max_rate", t.max_rate},
          {"rate_window", t.rate_window},
          {"step_ms", t.step_ms},
          {"izhikevich",
           {{"a", t.neuron.a}, {"b", t.neuron.b}, {"c", t.neuron.c}, {"d", t.neuron.d_reset}, {"v_th", t.neuron.v_th}}}};
}

TactileConfig tactile_from_json(const json& doc) {
  require_object(doc, "tactile");
  TactileConfig t;
  read_opt(doc, "soft_threshold", t.soft_threshold);
  read_opt(doc, "accumulation_window", t.accumulation_window);
  read_opt(doc, "gain", t.gain);
  read_opt(doc, "max_rate", t.max_rate);
  read_opt(doc, "rate_window", t.rate_window);
  read_opt(doc, "step_ms", t.step_ms);
  if (auto it = doc.find("izhikevich"); it != doc.end()) {
    require_object(*it, "izhikevich");
    read_opt(*it, "a", t.neuron.a);
    read_opt(*it, "b", t.neuron.b);
    read_opt(*it, "c", t.neuron.c);
    read_opt(*it, "d", t.neuron.d_reset);
    read_opt(*it, "v_th", t.neuron.v_th);
  }
  return t;
}

json place_to_json(const PlaceCodeConfig& p) {
  return {{"neurons_per_joint", p.neurons_per_joint}, {"bits", p.bits}, {"sigma_spacing_ratio", p.sigma_spacing_ratio}};
}

PlaceCodeConfig place_from_json(const json& doc) {
  require_object(doc, "placecode");
  PlaceCodeConfig p;
  read_opt(doc, "neurons_per_joint", p.neurons_per_joint);
  read_opt(doc, "bits", p.bits);
  read_opt(doc, "sigma_spacing_ratio", p.sigma_spacing_ratio);
  return p;
}

}  // namespace

EncoderConfig AppConfig::encoder() const { return {limits(), place, tactile}; }

std::vector<JointLimits> AppConfig::limits() const {
  std::vector<JointLimits> out;
  out.reserve(joints.size());
  for (const auto& j : joints) out.push_back(j.limits);
  return out;
}

JointAngles AppConfig::home() const {
  JointAngles x(static_cast<Eigen::Index>(joints.size()));
  for (std::size_t j = 0; j < joints.size(); ++j) {
    x[static_cast<Eigen::Index>(j)] = 0.5 * (joints[j].limits.min + joints[j].limits.max);
  }
  return x;
}

std::size_t AppConfig::joint_index(const std::string& name) const {
  for (std::size_t j = 0; j < joints.size(); ++j) {
    if (joints[j].name == name) return j;
  }
  fail(ErrorKind::config, "unknown joint '" + name + "'");
}

std::size_t AppConfig::patch_index(const std::string& id) const {
  for (std::size_t p = 0; p < patches.size(); ++p) {
    if (patches[p].id == id) return p;
  }
  fail(ErrorKind::config, "unknown patch '" + id + "'");
}

const PatchSpec& AppConfig::patch(const std::string& id) const { return patches[patch_index(id)]; }

void AppConfig::validate() const {
  if (joints.empty()) fail(ErrorKind::config, "config: at least one joint is required");
  std::set<std::string> names;
  for (const auto& j : joints) {
    if (j.name.empty() || !names.insert(j.name).second) fail(ErrorKind::config, "config: joint names must be unique");
    if (!(j.limits.max > j.limits.min)) fail(ErrorKind::config, "config: joint '" + j.name + "' needs min < max");
    if (!(j.max_velocity > 0.0)) fail(ErrorKind::config, "config: joint '" + j.name + "' needs max_velocity > 0");
  }
  if (patches.empty()) fail(ErrorKind::config, "config: at least one patch is required");
  std::set<std::string> ids;
  for (const auto& p : patches) {
    if (p.id.empty() || !ids.insert(p.id).second) fail(ErrorKind::config, "config: patch ids must be unique");
    if (std::abs(p.axis.norm() - 1.0) > 1e-9) fail(ErrorKind::config, "config: patch '" + p.id + "' axis is not unit");
    if (p.theta_sign != 1 && p.theta_sign != -1) fail(ErrorKind::config, "config: theta_sign must be +1 or -1");
    if (p.cells == 0) fail(ErrorKind::config, "config: patch '" + p.id + "' needs at least one cell");
    if (!p.attached_joint.empty()) joint_index(p.attached_joint);
  }
  if (!(memory.beta > 0.0)) fail(ErrorKind::config, "config: memory.beta must be positive");
  if (!(memory.max_pair_gap >= 0.0)) fail(ErrorKind::config, "config: memory.max_pair_gap must be >= 0");
  if (!(sim.touch_noise >= 0.0)) fail(ErrorKind::config, "config: sim.touch_noise must be >= 0");
  if (!(sim.sweep_speed_gain > 0.0)) fail(ErrorKind::config, "config: sim.sweep_speed_gain must be positive");
  if (!(tick_rate_hz > 0.0) || !std::isfinite(tick_rate_hz)) fail(ErrorKind::config, "config: tick_rate_hz must be positive");
  encoder().validate();
}

AppConfig default_config() {
  AppConfig c;
  c.joints = {{"arm_lift", {-1.0, 1.0}, 2.0}, {"arm_flex", {-2.6, 0.0}, 2.0}, {"wrist_roll", {-1.9, 1.9}, 2.0}};
  c.patches = {{"wrist_upper", Vec3::UnitZ(), 1, "arm_flex", 3},
               {"wrist_under", Vec3::UnitZ(), -1, "arm_flex", 3},
               {"wrist_left", Vec3::UnitX(), 1, "wrist_roll", 3},
               {"wrist_right", Vec3::UnitX(), -1, "wrist_roll", 3}};
  return c;
}

nlohmann::json encoder_to_json(const EncoderConfig& e) {
  json limits = json::array();
  for (const auto& l : e.joint_limits) limits.push_back(json::array({l.min, l.max}));
  return {{"joint_limits", limits}, {"placecode", place_to_json(e.place)}, {"tactile", tactile_to_json(e.tactile)}};
}

EncoderConfig encoder_from_json(const nlohmann::json& doc) {
  require_object(doc, "encoder");
  EncoderConfig e;
  const json& limits = require(doc, "joint_limits");
  if (!limits.is_array()) fail(ErrorKind::config, "encoder: joint_limits must be an array");
  for (const auto& l : limits) {
    if (!l.is_array() || l.size() != 2 || !l[0].is_number() || !l[1].is_number()) {
      fail(ErrorKind::config, "encoder: each joint limit is [min, max]");
    }
    e.joint_limits.push_back({l[0].get<double>(), l[1].get<double>()});
  }
  e.place = place_from_json(require(doc, "placecode"));
  e.tactile = tactile_from_json(require(doc, "tactile"));
  e.validate();
  return e;
}

nlohmann::json patch_to_json(const PatchSpec& p) {
  return {{"id", p.id},
          {"axis", vec3_to_json(p.axis)},
          {"theta_sign", p.theta_sign},
          {"attached_joint", p.attached_joint},
          {"cells", p.cells}};
}

PatchSpec patch_from_json(const nlohmann::json& doc) {
  require_object(doc, "patch");
  PatchSpec p;
  read_opt(doc, "id", p.id);
  if (p.id.empty()) fail(ErrorKind::config, "config: patch needs a non-empty 'id'");
  if (auto it = doc.find("axis"); it != doc.end()) p.axis = vec3_from_json(*it);
  read_opt(doc, "theta_sign", p.theta_sign);
  read_opt(doc, "attached_joint", p.attached_joint);
  read_opt(doc, "cells", p.cells);
  return p;
}

nlohmann::json config_to_json(const AppConfig& c) {
  json joints = json::array();
  for (const auto& j : c.joints) {
    joints.push_back({{"name", j.name}, {"min", j.limits.min}, {"max", j.limits.max}, {"max_velocity", j.max_velocity}});
  }
  json patches = json::array();
  for (const auto& p : c.patches) patches.push_back(patch_to_json(p));
  return {{"joints", joints},
          {"patches", patches},
          {"placecode", place_to_json(c.place)},
          {"tactile", tactile_to_json(c.tactile)},
          {"memory", {{"beta", c.memory.beta}, {"max_pair_gap", c.memory.max_pair_gap}}},
          {"sim", {{"touch_noise", c.sim.touch_noise}, {"sweep_speed_gain", c.sim.sweep_speed_gain}}},
          {"tick_rate_hz", c.tick_rate_hz},
          {"seed", c.seed}};
}

AppConfig config_from_json(const nlohmann::json& doc) {
  require_object(doc, "config");
  AppConfig c = default_config();
  try {
    if (auto it = doc.find("joints"); it != doc.end()) {
      if (!it->is_array()) fail(ErrorKind::config, "config: joints must be an array");
      c.joints.clear();
      for (const auto& j : *it) {
        JointSpec spec;
        spec.name = require(j, "name").get<std::string>();
        spec.limits = {require(j, "min").get<double>(), require(j, "max").get<double>()};
        read_opt(j, "max_velocity", spec.max_velocity);
        c.joints.push_back(spec);
      }
    }
    if (auto it = doc.find("patches"); it != doc.end()) {
      if (!it->is_array()) fail(ErrorKind::config, "config: patches must be an array");
      c.patches.clear();
      for (const auto& p : *it) c.patches.push_back(patch_from_json(p));
    }
  } catch (const json::exception& e) {
    fail(ErrorKind::config, std::string("config: ") + e.what());
  }
  if (auto it = doc.find("placecode"); it != doc.end()) c.place = place_from_json(*it);
  if (auto it = doc.find("tactile"); it != doc.end()) c.tactile = tactile_from_json(*it);
  if (auto it = doc.find("memory"); it != doc.end()) {
    require_object(*it, "memory");
    read_opt(*it, "beta", c.memory.beta);
    read_opt(*it, "max_pair_gap", c.memory.max_pair_gap);
  }
  if (auto it = doc.find("sim"); it != doc.end()) {
    require_object(*it, "sim");
    read_opt(*it, "touch_noise", c.sim.touch_noise);
    read_opt(*it, "sweep_speed_gain", c.sim.sweep_speed_gain);
  }
  read_opt(doc, "tick_rate_hz", c.tick_rate_hz);
  read_opt(doc, "seed", c.seed);
  c.validate();
  return c;
}

AppConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::io, "cannot open config " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    fail(ErrorKind::config, "config " + path.string() + ": " + e.what());
  }
  return config_from_json(doc);
}

}  // namespace hasm
