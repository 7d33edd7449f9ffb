#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hasm/config.hpp"
#include "hasm/memory.hpp"
#include "hasm/recording.hpp"
#include "hasm/sim.hpp"

namespace hasm {

struct TrajectoryRow {
  std::uint64_t tick = 0;
  double t = 0.0;
  JointAngles angles;    // measured at t, before this tick's command
  JointAngles velocity;  // (angle after tick - angle before) / dt
  std::vector<double> f_total;
  std::vector<double> rho;
  int active_patch = -1;  // index into config.patches, -1 when no patch fired
  std::optional<JointAngles> target;
  std::optional<double> entropy;
};

// Closed loop shared by eval and the live session. Per tick: sense, run
// every patch pipeline, recall from the bank of the firing patch with the
// largest rho, rate-limit the decision and advance the world.
class Controller {
 public:
  Controller(AppConfig config, std::uint64_t seed);

  // Replaces any bank for the same patch. The bank must match the
  // configured encoder and patch geometry (ErrorKind::config otherwise).
  void load_bank(MemoryBank bank);
  void clear_banks();
  bool has_bank(const std::string& patch_id) const;

  void reset(const JointAngles& start);

  // Overrides every bank's beta; nullopt restores the stored values.
  void set_beta(std::optional<double> beta);
  std::optional<double> beta_override() const { return beta_; }

  TrajectoryRow tick(std::span<const double> magnitudes);
  TrajectoryRow tick_frames(std::span<const PatchFrame> frames);

  const World& world() const { return world_; }
  const AppConfig& config() const { return config_; }

 private:
  AppConfig config_;
  Encoder encoder_;
  World world_;
  std::vector<PatchEncoder> pipelines_;
  std::vector<Rope3dRotator> rotators_;
  std::map<std::string, MemoryBank> banks_;
  std::optional<double> beta_;
  double max_step_;
};

struct ClosedLoopSpec {
  JointAngles start;
  TouchScript script;
  double duration = 1.0;
  std::uint64_t seed = 0;
  std::optional<double> beta;
};

std::vector<TrajectoryRow> run_closed_loop(const AppConfig& config, std::span<const MemoryBank> banks,
                                           const ClosedLoopSpec& spec);

// Columns: tick, t, one angle and one velocity per joint, F_total per patch,
// active patch id (empty when none), weights entropy (empty when no recall).
void write_trajectory_csv(std::ostream& out, const AppConfig& config, std::span<const TrajectoryRow> rows);

// Ticks of one episode on which `patch` fired, with the density at each.
std::vector<TactileFeature> extract_features(const Recording& rec, const AppConfig& config, const std::string& patch,
                                             std::uint32_t episode);

struct TrainingReport {
  PairingStats pairing;
  TrainStats train;
  std::size_t episodes = 0;
};

// Each episode of each recording goes through a fresh tactile pipeline and
// contributes its own paired sequences.
MemoryBank train_from_recordings(std::span<const Recording> recordings, const AppConfig& config,
                                 const std::string& patch, double beta, TrainingReport* report = nullptr);

}  // namespace hasm
