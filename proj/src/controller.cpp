#include "hasm/controller.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <set>

#include "hasm/bank_io.hpp"
#include "hasm/error.hpp"

namespace hasm {
namespace {

double min_max_step(const AppConfig& config) {
  double v = std::numeric_limits<double>::infinity();
  for (const auto& j : config.joints) v = std::min(v, j.max_velocity);
  return v * config.tick_period();
}

}  // namespace

Controller::Controller(AppConfig config, std::uint64_t seed)
    : config_(std::move(config)), encoder_(config_.encoder()), world_(config_, seed),
      rotators_(config_.patches.size()), max_step_(min_max_step(config_)) {
  pipelines_.reserve(config_.patches.size());
  for (std::size_t p = 0; p < config_.patches.size(); ++p) pipelines_.emplace_back(config_.tactile, config_.tick_period());
}

void Controller::load_bank(MemoryBank bank) {
  check_bank_compatible(bank, encoder_.config());
  const PatchSpec& expected = config_.patch(bank.patch_id());
  if (!bank.patch().axis.isApprox(expected.axis, 1e-12) || bank.patch().theta_sign != expected.theta_sign) {
    fail(ErrorKind::config, "bank for patch '" + bank.patch_id() + "' has a different patch geometry");
  }
  const std::string id = bank.patch_id();
  banks_.insert_or_assign(id, std::move(bank));
}

void Controller::clear_banks() { banks_.clear(); }

bool Controller::has_bank(const std::string& patch_id) const { return banks_.count(patch_id) > 0; }

void Controller::reset(const JointAngles& start) {
  world_.reset(start);
  for (auto& p : pipelines_) p.reset();
}

void Controller::set_beta(std::optional<double> beta) {
  if (beta && (!(*beta > 0.0) || !std::isfinite(*beta))) fail(ErrorKind::invalid_argument, "beta must be positive");
  beta_ = beta;
}

TrajectoryRow Controller::tick(std::span<const double> magnitudes) { return tick_frames(world_.sense(magnitudes)); }

TrajectoryRow Controller::tick_frames(std::span<const PatchFrame> frames) {
  if (frames.size() != config_.patches.size()) fail(ErrorKind::dimension, "controller: one frame per patch");
  TrajectoryRow row;
  row.tick = world_.ticks();
  row.t = world_.time();
  row.angles = world_.angles();
  row.f_total.resize(frames.size());
  row.rho.resize(frames.size());

  int best = -1;
  for (std::size_t p = 0; p < frames.size(); ++p) {
    PatchFrame frame = frames[p];
    frame.timestamp = row.t;
    const TactileSample s = pipelines_[p].step(frame);
    row.f_total[p] = s.f_total;
    row.rho[p] = s.rho;
    if (s.spikes > 0 && has_bank(config_.patches[p].id) && (best < 0 || s.rho > row.rho[static_cast<std::size_t>(best)])) {
      best = static_cast<int>(p);
    }
  }

  std::optional<JointAngles> command;
  if (best >= 0) {
    const auto p = static_cast<std::size_t>(best);
    const MemoryBank& bank = banks_.at(config_.patches[p].id);
    const Eigen::VectorXd q = encoder_.query(row.angles, row.rho[p], config_.patches[p], rotators_[p]);
    const Decision d = recall_query(q, bank, beta_.value_or(bank.beta()));
    row.active_patch = best;
    row.target = d.target;
    row.entropy = d.weights_entropy;
    const auto limits = config_.limits();
    command = decision_to_command(d, row.angles, max_step_, limits);
  }
  world_.tick(command);
  row.velocity = (world_.angles() - row.angles) / world_.dt();
  return row;
}

std::vector<TrajectoryRow> run_closed_loop(const AppConfig& config, std::span<const MemoryBank> banks,
                                           const ClosedLoopSpec& spec) {
  Controller ctl(config, spec.seed);
  for (const auto& b : banks) ctl.load_bank(b);
  ctl.set_beta(spec.beta);
  ctl.reset(spec.start);
  const auto ticks = static_cast<std::uint64_t>(std::llround(spec.duration * config.tick_rate_hz));
  std::vector<TrajectoryRow> rows;
  rows.reserve(ticks);
  for (std::uint64_t k = 0; k < ticks; ++k) {
    rows.push_back(ctl.tick(touch_magnitudes(spec.script, config, ctl.world().time())));
  }
  return rows;
}

void write_trajectory_csv(std::ostream& out, const AppConfig& config, std::span<const TrajectoryRow> rows) {
  out << "tick,t";
  for (const auto& j : config.joints) out << ',' << j.name;
  for (const auto& j : config.joints) out << ",vel_" << j.name;
  for (const auto& p : config.patches) out << ",f_total_" << p.id;
  out << ",active_patch,entropy\n";
  out << std::setprecision(17);
  for (const auto& r : rows) {
    out << r.tick << ',' << r.t;
    for (Eigen::Index j = 0; j < r.angles.size(); ++j) out << ',' << r.angles[j];
    for (Eigen::Index j = 0; j < r.velocity.size(); ++j) out << ',' << r.velocity[j];
    for (double f : r.f_total) out << ',' << f;
    out << ',';
    if (r.active_patch >= 0) out << config.patches[static_cast<std::size_t>(r.active_patch)].id;
    out << ',';
    if (r.entropy) out << *r.entropy;
    out << '\n';
  }
  if (!out) fail(ErrorKind::io, "trajectory: write failed");
}

std::vector<TactileFeature> extract_features(const Recording& rec, const AppConfig& config, const std::string& patch,
                                             std::uint32_t episode) {
  const PatchSpec& spec = config.patch(patch);
  const auto it = std::find(rec.patches.begin(), rec.patches.end(), patch);
  if (it == rec.patches.end()) fail(ErrorKind::data, "recording has no patch '" + patch + "'");
  const auto column = static_cast<std::size_t>(it - rec.patches.begin());

  PatchEncoder pipeline(config.tactile, 1.0 / rec.tick_rate_hz);
  std::vector<TactileFeature> out;
  for (const auto& r : rec.records) {
    if (r.episode != episode) continue;
    PatchFrame frame{r.t, patch, r.patches[column].cells, spec.axis, spec.theta_sign};
    const TactileSample s = pipeline.step(frame);
    if (s.spikes > 0) out.push_back({r.t, s.rho});
  }
  return out;
}

MemoryBank train_from_recordings(std::span<const Recording> recordings, const AppConfig& config,
                                 const std::string& patch, double beta, TrainingReport* report) {
  TrainingReport local;
  std::vector<PairedSequence> sequences;
  for (const auto& rec : recordings) {
    if (rec.joints.size() != config.joints.size()) fail(ErrorKind::data, "recording joint count differs from config");
    if (std::abs(rec.tick_rate_hz - config.tick_rate_hz) > 1e-9) {
      fail(ErrorKind::data, "recording tick rate differs from config");
    }
    std::set<std::uint32_t> episodes;
    for (const auto& r : rec.records) episodes.insert(r.episode);
    for (std::uint32_t ep : episodes) {
      ++local.episodes;
      std::vector<StateSample> states;
      for (const auto& r : rec.records) {
        if (r.episode == ep) states.push_back({r.t, r.joints});
      }
      const auto features = extract_features(rec, config, patch, ep);
      PairingStats stats;
      std::vector<PairedSequence> seqs;
      try {
        seqs = pair_samples(states, features, config.memory.max_pair_gap, &stats);
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::data) throw;
        stats.states = states.size();
        stats.dropped = states.size();
      }
      local.pairing.states += stats.states;
      local.pairing.paired += stats.paired;
      local.pairing.dropped += stats.dropped;
      local.pairing.sequences += stats.sequences;
      for (auto& s : seqs) sequences.push_back(std::move(s));
    }
  }
  if (report) *report = local;
  if (sequences.empty()) fail(ErrorKind::data, "no synchronized samples");
  Encoder encoder(config.encoder());
  MemoryBank bank = train(sequences, encoder, config.patch(patch), beta, &local.train);
  if (report) *report = local;
  return bank;
}

}  // namespace hasm
