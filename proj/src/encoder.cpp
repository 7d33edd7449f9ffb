#include "hasm/encoder.hpp"

#include "hasm/error.hpp"
#include "hasm/memory.hpp"

namespace hasm {

void EncoderConfig::validate() const {
  if (joint_limits.empty()) fail(ErrorKind::config, "encoder: at least one joint is required");
  for (const auto& lim : joint_limits) {
    if (!(lim.max > lim.min)) fail(ErrorKind::config, "encoder: joint limits must satisfy min < max");
  }
  if (place.neurons_per_joint < 2) fail(ErrorKind::config, "encoder: neurons_per_joint must be >= 2");
  if (place.bits < 1 || place.bits > 52) fail(ErrorKind::config, "encoder: bits must be in [1, 52]");
  if (!(place.sigma_spacing_ratio > 0.0)) fail(ErrorKind::config, "encoder: sigma_spacing_ratio must be positive");
  if (dimension() % 3 != 0) {
    fail(ErrorKind::config, "encoder: bits * neurons_per_joint * joints = " + std::to_string(dimension()) +
                                " is not divisible by 3");
  }
  tactile.validate();
}

bool operator==(const PlaceCodeConfig& a, const PlaceCodeConfig& b) {
  return a.neurons_per_joint == b.neurons_per_joint && a.bits == b.bits &&
         a.sigma_spacing_ratio == b.sigma_spacing_ratio;
}

bool operator==(const TactileConfig& a, const TactileConfig& b) {
  return a.soft_threshold == b.soft_threshold && a.accumulation_window == b.accumulation_window &&
         a.gain == b.gain && a.max_rate == b.max_rate && a.rate_window == b.rate_window && a.step_ms == b.step_ms &&
         a.neuron.a == b.neuron.a && a.neuron.b == b.neuron.b && a.neuron.c == b.neuron.c &&
         a.neuron.d_reset == b.neuron.d_reset && a.neuron.v_th == b.neuron.v_th;
}

bool operator==(const EncoderConfig& a, const EncoderConfig& b) {
  if (a.joint_limits.size() != b.joint_limits.size()) return false;
  for (std::size_t j = 0; j < a.joint_limits.size(); ++j) {
    if (a.joint_limits[j].min != b.joint_limits[j].min || a.joint_limits[j].max != b.joint_limits[j].max) {
      return false;
    }
  }
  return a.place == b.place && a.tactile == b.tactile;
}

PlaceEncoder Encoder::make_place(const EncoderConfig& config) {
  config.validate();
  std::vector<JointTuning> tunings;
  tunings.reserve(config.joint_limits.size());
  for (const auto& lim : config.joint_limits) {
    tunings.push_back(JointTuning::evenly_spaced(lim, config.place.neurons_per_joint, config.place.sigma_spacing_ratio));
  }
  return PlaceEncoder(std::move(tunings), config.place.bits);
}

Encoder::Encoder(EncoderConfig config) : config_(std::move(config)), place_(make_place(config_)) {}

Eigen::VectorXd Encoder::query(const JointAngles& state, double rho, const PatchSpec& patch) const {
  const PlaceCode code = place_.encode(state);
  return bind(code.bits, build_embedding(rho, code, patch.axis, patch.theta_sign));
}

Eigen::VectorXd Encoder::query(const JointAngles& state, double rho, const PatchSpec& patch,
                               Rope3dRotator& cache) const {
  const PlaceCode code = place_.encode(state);
  return bind(code.bits, build_embedding(rho, code, patch.axis, patch.theta_sign, cache));
}

}  // namespace hasm
