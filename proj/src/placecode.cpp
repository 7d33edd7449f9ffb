#include "hasm/placecode.hpp"

#include <cmath>
#include <sstream>

#include "hasm/error.hpp"
#include "hasm/log.hpp"

namespace hasm {

JointTuning::JointTuning(JointLimits limits, std::size_t neurons, double sigma)
    : limits_(limits), sigma_(sigma) {
  if (!(limits.max > limits.min)) fail(ErrorKind::config, "joint tuning: limits must satisfy min < max");
  if (neurons < 2) fail(ErrorKind::config, "joint tuning: at least two neurons per joint are required");
  if (!(sigma > 0.0) || !std::isfinite(sigma)) fail(ErrorKind::config, "joint tuning: sigma must be positive");
  preferred_.resize(neurons);
  const double step = limits.range() / static_cast<double>(neurons - 1);
  for (std::size_t i = 0; i < neurons; ++i) preferred_[i] = limits.min + step * static_cast<double>(i);
  preferred_.back() = limits.max;
}

JointTuning JointTuning::evenly_spaced(JointLimits limits, std::size_t neurons, double sigma_spacing_ratio) {
  if (neurons < 2) fail(ErrorKind::config, "joint tuning: at least two neurons per joint are required");
  const double spacing = (limits.max - limits.min) / static_cast<double>(neurons - 1);
  return JointTuning(limits, neurons, sigma_spacing_ratio * spacing);
}

std::vector<double> tuning_response(double angle, const JointTuning& tuning) {
  const JointLimits lim = tuning.limits();
  if (!lim.contains(angle)) {
    std::ostringstream msg;
    msg << "joint angle " << angle << " outside [" << lim.min << ", " << lim.max << "], clamped";
    log_warning(msg.str());
    angle = lim.clamp(angle);
  }
  const double two_sigma_sq = 2.0 * tuning.sigma() * tuning.sigma();
  std::vector<double> out;
  out.reserve(tuning.size());
  for (double pref : tuning.preferred_angles()) {
    const double diff = angle - pref;
    out.push_back(std::exp(-(diff * diff) / two_sigma_sq));
  }
  return out;
}

std::uint64_t quantize_level(double rate, unsigned n) {
  if (n < 1 || n > 52) fail(ErrorKind::invalid_argument, "quantize_rate: bit count must be in [1, 52]");
  if (!(rate >= 0.0 && rate <= 1.0)) {
    std::ostringstream msg;
    msg << "rate " << rate << " outside [0, 1], clamped";
    log_warning(msg.str());
    rate = std::isnan(rate) ? 0.0 : (rate < 0.0 ? 0.0 : 1.0);
  }
  const double levels = std::ldexp(1.0, static_cast<int>(n)) - 1.0;
  return static_cast<std::uint64_t>(std::floor(rate * levels));
}

std::vector<int> quantize_rate(double rate, unsigned n) {
  const std::uint64_t level = quantize_level(rate, n);
  std::vector<int> bits(n);
  for (unsigned k = 0; k < n; ++k) bits[k] = ((level >> (n - 1 - k)) & 1u) ? 1 : -1;
  return bits;
}

PlaceCode encode_joints(const JointAngles& state, std::span<const JointTuning> tunings, unsigned n) {
  if (tunings.empty() || static_cast<std::size_t>(state.size()) != tunings.size()) {
    fail(ErrorKind::config, "encode_joints: tuning count does not match joint count");
  }
  std::size_t neurons = 0;
  for (const auto& t : tunings) neurons += t.size();

  PlaceCode code;
  code.bits_per_neuron = n;
  code.rates.resize(static_cast<Eigen::Index>(neurons));
  code.bits.resize(static_cast<Eigen::Index>(neurons * n));

  Eigen::Index neuron = 0;
  for (std::size_t j = 0; j < tunings.size(); ++j) {
    for (double r : tuning_response(state[static_cast<Eigen::Index>(j)], tunings[j])) {
      code.rates[neuron] = r;
      const auto bits = quantize_rate(r, n);
      for (unsigned k = 0; k < n; ++k) code.bits[neuron * n + k] = bits[k];
      ++neuron;
    }
  }
  return code;
}

PlaceEncoder::PlaceEncoder(std::vector<JointTuning> tunings, unsigned bits_per_neuron)
    : tunings_(std::move(tunings)), bits_(bits_per_neuron) {
  if (tunings_.empty()) fail(ErrorKind::config, "place encoder: at least one joint is required");
  if (bits_ < 1 || bits_ > 52) fail(ErrorKind::config, "place encoder: bits per neuron must be in [1, 52]");
  for (const auto& t : tunings_) {
    if (t.size() != tunings_.front().size()) {
      fail(ErrorKind::config, "place encoder: every joint needs the same neuron count");
    }
  }
}

double PlaceEncoder::resolution(std::size_t joint) const {
  return tunings_.at(joint).limits().range() / std::ldexp(1.0, static_cast<int>(bits_));
}

}  // namespace hasm
