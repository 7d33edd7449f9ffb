#include "hasm/memory.hpp"

#include <algorithm>
#include <cmath>

#include "hasm/error.hpp"
#include "hasm/log.hpp"

namespace hasm {
namespace {

constexpr double kGapEps = 1e-9;

}  // namespace

Eigen::VectorXd bind(const Eigen::VectorXd& state_code, const Eigen::VectorXd& obs_embedding) {
  if (state_code.size() != obs_embedding.size()) {
    fail(ErrorKind::dimension, "bind: length mismatch (" + std::to_string(state_code.size()) + " vs " +
                                   std::to_string(obs_embedding.size()) + ")");
  }
  return state_code.cwiseProduct(obs_embedding);
}

std::vector<PairedSequence> pair_samples(std::span<const StateSample> states,
                                         std::span<const TactileFeature> features, double max_gap,
                                         PairingStats* stats) {
  if (!(max_gap >= 0.0)) fail(ErrorKind::invalid_argument, "pair_samples: max_gap must be >= 0");
  PairingStats local;
  local.states = states.size();
  std::vector<PairedSequence> out;
  PairedSequence current;
  auto close_run = [&] {
    if (!current.empty()) out.push_back(std::move(current));
    current.clear();
  };

  for (const auto& s : states) {
    auto upper = std::lower_bound(features.begin(), features.end(), s.timestamp,
                                  [](const TactileFeature& f, double t) { return f.timestamp < t; });
    const TactileFeature* best = nullptr;
    double best_gap = 0.0;
    if (upper != features.begin()) {
      best = &*std::prev(upper);
      best_gap = s.timestamp - best->timestamp;
    }
    if (upper != features.end()) {
      const double gap = upper->timestamp - s.timestamp;
      if (!best || gap < best_gap) {
        best = &*upper;
        best_gap = gap;
      }
    }
    if (best && best_gap <= max_gap + kGapEps) {
      current.push_back({s.timestamp, s.angles, best->rho});
      ++local.paired;
    } else {
      ++local.dropped;
      close_run();
    }
  }
  close_run();
  local.sequences = out.size();
  if (stats) *stats = local;
  if (out.empty()) fail(ErrorKind::data, "no synchronized samples");
  return out;
}

MemoryBank::MemoryBank(Eigen::MatrixXd m, Eigen::MatrixXd s_shift, double beta, PatchSpec patch,
                       EncoderConfig encoder)
    : m_(std::move(m)), s_shift_(std::move(s_shift)), beta_(beta), patch_(std::move(patch)),
      encoder_(std::move(encoder)) {
  if (!(beta_ > 0.0) || !std::isfinite(beta_)) fail(ErrorKind::invalid_argument, "memory bank: beta must be positive");
  if (m_.cols() != s_shift_.cols()) fail(ErrorKind::dimension, "memory bank: M and S_shift column counts differ");
  if (static_cast<std::size_t>(m_.rows()) != encoder_.dimension()) {
    fail(ErrorKind::dimension, "memory bank: M rows do not match the encoder dimension");
  }
  if (static_cast<std::size_t>(s_shift_.rows()) != encoder_.joint_limits.size()) {
    fail(ErrorKind::dimension, "memory bank: S_shift rows do not match the joint count");
  }
  if (!m_.allFinite() || !s_shift_.allFinite()) fail(ErrorKind::data, "memory bank: non-finite entries");
  for (Eigen::Index j = 0; j < s_shift_.rows(); ++j) {
    const JointLimits& lim = encoder_.joint_limits[static_cast<std::size_t>(j)];
    if (s_shift_.row(j).size() > 0 && (s_shift_.row(j).minCoeff() < lim.min || s_shift_.row(j).maxCoeff() > lim.max)) {
      fail(ErrorKind::data, "memory bank: stored next state outside joint limits");
    }
  }
}

MemoryBank MemoryBank::with_beta(double beta) const {
  return MemoryBank(m_, s_shift_, beta, patch_, encoder_);
}

MemoryBank train(std::span<const PairedSequence> sequences, const Encoder& encoder, const PatchSpec& patch,
                 double beta, TrainStats* stats) {
  TrainStats local;
  local.sequences = sequences.size();
  std::size_t total = 0;
  for (const auto& seq : sequences) {
    if (seq.size() >= 2) total += seq.size() - 1;
  }
  const auto d = static_cast<Eigen::Index>(encoder.dimension());
  const auto nj = static_cast<Eigen::Index>(encoder.config().joint_limits.size());
  Eigen::MatrixXd m(d, static_cast<Eigen::Index>(total));
  Eigen::MatrixXd s(nj, static_cast<Eigen::Index>(total));

  Rope3dRotator cache;
  Eigen::Index col = 0;
  for (const auto& seq : sequences) {
    if (seq.size() < 2) {
      log_warning("train: sequence shorter than 2 samples skipped");
      ++local.skipped;
      continue;
    }
    for (std::size_t t = 0; t + 1 < seq.size(); ++t) {
      if (seq[t].state.size() != nj || seq[t + 1].state.size() != nj) {
        fail(ErrorKind::dimension, "train: sample joint count does not match the encoder");
      }
      m.col(col) = encoder.query(seq[t].state, seq[t].rho, patch, cache);
      s.col(col) = seq[t + 1].state;
      ++col;
    }
  }
  local.columns = static_cast<std::size_t>(col);
  if (stats) *stats = local;
  if (col == 0) fail(ErrorKind::data, "train: no sequence has two or more paired samples");
  return MemoryBank(std::move(m), std::move(s), beta, patch, encoder.config());
}

Eigen::VectorXd softmax(const Eigen::VectorXd& logits) {
  if (logits.size() == 0) return logits;
  Eigen::VectorXd w = (logits.array() - logits.maxCoeff()).exp();
  return w / w.sum();
}

double entropy(const Eigen::VectorXd& weights) {
  double h = 0.0;
  for (Eigen::Index i = 0; i < weights.size(); ++i) {
    if (weights[i] > 0.0) h -= weights[i] * std::log(weights[i]);
  }
  return h;
}

Decision recall_query(const Eigen::VectorXd& query, const MemoryBank& bank, double beta) {
  if (!bank.trained()) fail(ErrorKind::state, "recall: memory bank is untrained");
  if (static_cast<std::size_t>(query.size()) != bank.dimension()) {
    fail(ErrorKind::dimension, "recall: query length does not match the bank dimension");
  }
  if (!(beta > 0.0) || !std::isfinite(beta)) fail(ErrorKind::invalid_argument, "recall: beta must be positive");
  Decision d;
  d.weights = softmax(beta * (bank.m().transpose() * query));
  d.target = bank.s_shift() * d.weights;
  d.weights_entropy = entropy(d.weights);
  return d;
}

Decision recall(const JointAngles& state, const Eigen::VectorXd& obs, const MemoryBank& bank,
                const PlaceEncoder& place) {
  return recall_query(bind(place.encode(state).bits, obs), bank, bank.beta());
}

JointAngles decision_to_command(const Decision& decision, const JointAngles& current, double max_step,
                                std::span<const JointLimits> limits) {
  if (!(max_step > 0.0)) fail(ErrorKind::invalid_argument, "decision_to_command: max_step must be positive");
  if (decision.target.size() != current.size() || static_cast<std::size_t>(current.size()) != limits.size()) {
    fail(ErrorKind::dimension, "decision_to_command: joint count mismatch");
  }
  JointAngles cmd(current.size());
  for (Eigen::Index j = 0; j < current.size(); ++j) {
    const double step = std::clamp(decision.target[j] - current[j], -max_step, max_step);
    cmd[j] = limits[static_cast<std::size_t>(j)].clamp(current[j] + step);
  }
  return cmd;
}

}  // namespace hasm
