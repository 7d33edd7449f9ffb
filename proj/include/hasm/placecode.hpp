#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace hasm {

using JointAngles = Eigen::VectorXd;

struct JointLimits {
  double min = 0.0;
  double max = 0.0;

  double range() const { return max - min; }
  double clamp(double angle) const { return angle < min ? min : (angle > max ? max : angle); }
  bool contains(double angle) const { return angle >= min && angle <= max; }
};

// Gaussian population tuning for one joint: neurons with preferred angles
// spread evenly from limits.min to limits.max.
class JointTuning {
 public:
  JointTuning(JointLimits limits, std::size_t neurons, double sigma);

  // sigma = ratio * spacing between neighbouring preferred angles.
  static JointTuning evenly_spaced(JointLimits limits, std::size_t neurons, double sigma_spacing_ratio);

  const std::vector<double>& preferred_angles() const { return preferred_; }
  double sigma() const { return sigma_; }
  JointLimits limits() const { return limits_; }
  std::size_t size() const { return preferred_.size(); }
  double spacing() const { return limits_.range() / static_cast<double>(preferred_.size() - 1); }

 private:
  JointLimits limits_;
  double sigma_;
  std::vector<double> preferred_;
};

// Bipolar place code of a full joint state together with the per-neuron
// rates it was quantized from (rates feed the tactile salience ranking).
struct PlaceCode {
  Eigen::VectorXd bits;   // {-1,+1}, length bits_per_neuron * rates.size()
  Eigen::VectorXd rates;  // pre-quantization rates, one per neuron
  unsigned bits_per_neuron = 0;
};

// Response of every neuron of `tuning` to `angle`. Angles outside the joint
// limits are clamped and a warning is logged.
std::vector<double> tuning_response(double angle, const JointTuning& tuning);

// floor(rate * (2^n - 1)); rate is clamped to [0, 1] with a warning.
std::uint64_t quantize_level(double rate, unsigned n);

// n-bit MSB-first binary of quantize_level(rate, n), bit 0 -> -1, bit 1 -> +1.
std::vector<int> quantize_rate(double rate, unsigned n);

PlaceCode encode_joints(const JointAngles& state, std::span<const JointTuning> tunings, unsigned n);

// Immutable encoder over a fixed set of joint tunings.
class PlaceEncoder {
 public:
  PlaceEncoder(std::vector<JointTuning> tunings, unsigned bits_per_neuron);

  PlaceCode encode(const JointAngles& state) const { return encode_joints(state, tunings_, bits_); }

  const std::vector<JointTuning>& tunings() const { return tunings_; }
  unsigned bits_per_neuron() const { return bits_; }
  std::size_t joint_count() const { return tunings_.size(); }
  std::size_t neurons_per_joint() const { return tunings_.front().size(); }
  std::size_t neuron_count() const { return joint_count() * neurons_per_joint(); }
  std::size_t dimension() const { return neuron_count() * bits_; }

  // Width of one quantization step in angle units for joint j: range / 2^n.
  double resolution(std::size_t joint) const;

 private:
  std::vector<JointTuning> tunings_;
  unsigned bits_;
};

}  // namespace hasm
