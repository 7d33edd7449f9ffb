#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hasm/encoder.hpp"

namespace hasm {

// Elementwise product; lengths must match.
Eigen::VectorXd bind(const Eigen::VectorXd& state_code, const Eigen::VectorXd& obs_embedding);

struct StateSample {
  double timestamp = 0.0;
  JointAngles angles;
};

// A tick on which the patch neuron fired, with the density at that tick.
struct TactileFeature {
  double timestamp = 0.0;
  double rho = 0.0;
};

struct PairedSample {
  double timestamp = 0.0;
  JointAngles state;
  double rho = 0.0;
};

using PairedSequence = std::vector<PairedSample>;

struct PairingStats {
  std::size_t states = 0;
  std::size_t paired = 0;
  std::size_t dropped = 0;
  std::size_t sequences = 0;
};

// Pairs each state with the nearest feature within +-max_gap (ties go to the
// earlier feature). States without a partner are dropped and split the
// stream, so every returned sequence is a contiguous run of paired states.
// Throws ErrorKind::data ("no synchronized samples") when nothing pairs.
std::vector<PairedSequence> pair_samples(std::span<const StateSample> states,
                                         std::span<const TactileFeature> features, double max_gap,
                                         PairingStats* stats = nullptr);

class MemoryBank {
 public:
  MemoryBank() = default;
  MemoryBank(Eigen::MatrixXd m, Eigen::MatrixXd s_shift, double beta, PatchSpec patch, EncoderConfig encoder);

  const Eigen::MatrixXd& m() const { return m_; }
  const Eigen::MatrixXd& s_shift() const { return s_shift_; }
  double beta() const { return beta_; }
  const PatchSpec& patch() const { return patch_; }
  const std::string& patch_id() const { return patch_.id; }
  const EncoderConfig& encoder() const { return encoder_; }

  std::size_t dimension() const { return static_cast<std::size_t>(m_.rows()); }
  std::size_t columns() const { return static_cast<std::size_t>(m_.cols()); }
  std::size_t joints() const { return static_cast<std::size_t>(s_shift_.rows()); }
  bool trained() const { return m_.cols() > 0; }

  MemoryBank with_beta(double beta) const;

 private:
  Eigen::MatrixXd m_;
  Eigen::MatrixXd s_shift_;
  double beta_ = 8.0;
  PatchSpec patch_;
  EncoderConfig encoder_;
};

struct TrainStats {
  std::size_t sequences = 0;
  std::size_t skipped = 0;  // sequences shorter than 2
  std::size_t columns = 0;
};

// For each sequence and t in [0, L-2]: M gets bind(encode(s_t), embed(o_t)),
// S_shift gets raw s_{t+1}. Nothing links one sequence to the next.
MemoryBank train(std::span<const PairedSequence> sequences, const Encoder& encoder, const PatchSpec& patch,
                 double beta, TrainStats* stats = nullptr);

struct Decision {
  JointAngles target;
  double weights_entropy = 0.0;
  Eigen::VectorXd weights;
};

// Max-subtracted softmax.
Eigen::VectorXd softmax(const Eigen::VectorXd& logits);
double entropy(const Eigen::VectorXd& weights);

Decision recall_query(const Eigen::VectorXd& query, const MemoryBank& bank, double beta);
Decision recall(const JointAngles& state, const Eigen::VectorXd& obs, const MemoryBank& bank,
                const PlaceEncoder& place);

// Moves each joint toward the target by at most max_step, then clamps to
// the joint limits.
JointAngles decision_to_command(const Decision& decision, const JointAngles& current, double max_step,
                                std::span<const JointLimits> limits);

}  // namespace hasm
