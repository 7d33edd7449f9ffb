#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hasm/config.hpp"
#include "hasm/controller.hpp"
#include "hasm/memory.hpp"
#include "hasm/recording.hpp"
#include "hasm/sim.hpp"

namespace hasm {

// Default robot with the finer compliance encoder (8 bits per neuron, beta 8).
AppConfig compliance_config();

// Spearman rank correlation with average ranks for ties; NaN when either
// side is constant.
double spearman(std::span<const double> x, std::span<const double> y);

struct ComplianceSetup {
  std::string joint = "arm_flex";
  std::string negative_patch = "wrist_upper";  // pushes the joint toward its minimum
  std::string positive_patch = "wrist_under";
  std::vector<double> train_levels = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15, 16};
  std::size_t repetitions = 2;
  std::vector<double> eval_levels = {2, 5, 10, 15};
  double eval_duration = 2.0;      // s
  std::size_t settle_ticks = 15;   // excluded from the steady-state mean
  double start_fraction = 0.3;     // eval start, measured from the sweep's starting limit

  int direction(const std::string& patch) const;
};

// One episode per (level, repetition): a full sweep at constant touch.
Recording compliance_recording(const AppConfig& config, const ComplianceSetup& setup, const std::string& patch,
                               std::uint64_t seed);

struct ComplianceLevel {
  std::string patch;
  double force = 0.0;
  double speed = 0.0;  // signed steady-state mean velocity of the swept joint
  std::size_t steady_ticks = 0;
  double mean_entropy = 0.0;
};

struct ComplianceReport {
  std::vector<ComplianceLevel> levels;
  std::vector<std::pair<std::string, double>> spearman;  // per patch, force vs |speed|
  bool strictly_increasing = true;
  bool opposite_signs = true;
  std::vector<TrajectoryRow> rows;  // every evaluation run back to back
};

ComplianceReport evaluate_compliance(const AppConfig& config, std::span<const MemoryBank> banks,
                                     const ComplianceSetup& setup, std::uint64_t seed);

struct ReplayReport {
  Eigen::VectorXd max_joint_error;
  Eigen::VectorXd tolerance;  // joint range / 2^bits
  double max_error = 0.0;     // over all joints, radians
  double worst_ratio = 0.0;   // max over joints of error / tolerance
  std::size_t steps = 0;
  std::size_t missed = 0;     // ticks that issued no recall
  std::vector<TrajectoryRow> rows;

  bool passed() const { return steps > 0 && missed == 0 && worst_ratio <= 1.0; }
};

// Plays the recorded frames of one episode back through the closed loop from
// the first recorded state; the decision of tick k is compared with record k+1.
ReplayReport evaluate_replay(const AppConfig& config, std::span<const MemoryBank> banks, const Recording& rec,
                             std::uint32_t episode, std::optional<double> beta, std::uint64_t seed);

// Reach on one patch, grasp-retract on another.
struct DispatchSetup {
  SequenceSpec reach;
  SequenceSpec grasp;
  std::size_t gap_ticks = 50;
  double beta = 32.0;
};

DispatchSetup default_dispatch();

struct DispatchReport {
  ReplayReport reach;
  ReplayReport grasp;
  double gap_max_speed = 0.0;  // rad/s while nothing is touched
  std::vector<TrajectoryRow> rows;

  bool passed() const { return reach.passed() && grasp.passed() && gap_max_speed == 0.0; }
};

DispatchReport evaluate_dispatch(const AppConfig& config, const DispatchSetup& setup, std::uint64_t seed);

Recording sequence_recording(const AppConfig& config, const SequenceSpec& spec, std::uint64_t seed);

}  // namespace hasm
