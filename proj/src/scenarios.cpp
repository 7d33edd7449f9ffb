#include "hasm/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "hasm/error.hpp"

namespace hasm {
namespace {

std::vector<double> average_ranks(std::span<const double> v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

Eigen::VectorXd resolution(const AppConfig& config) {
  Eigen::VectorXd tol(static_cast<Eigen::Index>(config.joints.size()));
  for (std::size_t j = 0; j < config.joints.size(); ++j) {
    tol[static_cast<Eigen::Index>(j)] = config.joints[j].limits.range() / std::ldexp(1.0, static_cast<int>(config.place.bits));
  }
  return tol;
}

// Accumulates decision-vs-expected errors for ticks [first, first + expected.size() - 1).
void score(ReplayReport& report, std::span<const TrajectoryRow> rows, std::size_t first,
           std::span<const JointAngles> expected) {
  report.max_joint_error = Eigen::VectorXd::Zero(report.tolerance.size());
  for (std::size_t k = 0; k + 1 < expected.size(); ++k) {
    const TrajectoryRow& row = rows[first + k];
    ++report.steps;
    if (!row.target) {
      ++report.missed;
      continue;
    }
    const Eigen::VectorXd err = (*row.target - expected[k + 1]).cwiseAbs();
    report.max_joint_error = report.max_joint_error.cwiseMax(err);
  }
  report.max_error = report.max_joint_error.maxCoeff();
  report.worst_ratio = report.max_joint_error.cwiseQuotient(report.tolerance).maxCoeff();
}

}  // namespace

AppConfig compliance_config() {
  AppConfig c = default_config();
  c.place.bits = 8;
  c.memory.beta = 8.0;
  c.validate();
  return c;
}

double spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) fail(ErrorKind::invalid_argument, "spearman: need two equal-length series");
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return sxy / std::sqrt(sxx * syy);
}

int ComplianceSetup::direction(const std::string& patch) const {
  if (patch == negative_patch) return -1;
  if (patch == positive_patch) return 1;
  fail(ErrorKind::invalid_argument, "compliance: patch '" + patch + "' is not part of the setup");
}

Recording compliance_recording(const AppConfig& config, const ComplianceSetup& setup, const std::string& patch,
                               std::uint64_t seed) {
  Recording rec = empty_recording(config);
  const JointLimits lim = config.joints[config.joint_index(setup.joint)].limits;
  std::uint32_t episode = 0;
  double t0 = 0.0;
  for (double level : setup.train_levels) {
    if (!(level > 0.0)) fail(ErrorKind::invalid_argument, "compliance: training levels must be positive");
    // Time to cover the range plus a margin; the sweep stops at the far limit.
    const double duration = lim.range() / (config.sim.sweep_speed_gain * level) + 1.0;
    for (std::size_t r = 0; r < setup.repetitions; ++r) {
      SweepSpec spec{setup.joint, setup.direction(patch), patch, {{level, duration}}, std::nullopt};
      scripted_sweep(config, spec, seed + episode, rec, episode, t0);
      t0 = rec.records.back().t + 1.0;
      ++episode;
    }
  }
  return rec;
}

ComplianceReport evaluate_compliance(const AppConfig& config, std::span<const MemoryBank> banks,
                                     const ComplianceSetup& setup, std::uint64_t seed) {
  ComplianceReport report;
  const std::size_t joint = config.joint_index(setup.joint);
  const auto jidx = static_cast<Eigen::Index>(joint);
  const JointLimits lim = config.joints[joint].limits;

  std::vector<std::string> patches;
  for (const auto& b : banks) patches.push_back(b.patch_id());
  std::uint64_t run = 0;
  for (const auto& patch : patches) {
    const int dir = setup.direction(patch);
    std::vector<double> forces, speeds;
    for (double level : setup.eval_levels) {
      JointAngles start = config.home();
      start[jidx] = dir < 0 ? lim.max - setup.start_fraction * lim.range() : lim.min + setup.start_fraction * lim.range();
      ClosedLoopSpec spec{start, {{patch, level, 0.0, setup.eval_duration}}, setup.eval_duration, seed + run++,
                          std::nullopt};
      auto rows = run_closed_loop(config, banks, spec);

      ComplianceLevel out{patch, level, 0.0, 0, 0.0};
      double entropy_sum = 0.0;
      std::size_t recalls = 0;
      for (std::size_t k = setup.settle_ticks; k < rows.size(); ++k) {
        // Stop averaging once the joint is near the far limit and slowing down.
        const double a = rows[k].angles[jidx];
        if ((dir < 0 && a <= lim.min + 0.1 * lim.range()) || (dir > 0 && a >= lim.max - 0.1 * lim.range())) break;
        out.speed += rows[k].velocity[jidx];
        ++out.steady_ticks;
        if (rows[k].entropy) {
          entropy_sum += *rows[k].entropy;
          ++recalls;
        }
      }
      if (out.steady_ticks > 0) out.speed /= static_cast<double>(out.steady_ticks);
      if (recalls > 0) out.mean_entropy = entropy_sum / static_cast<double>(recalls);
      if (!(out.speed * dir > 0.0)) report.opposite_signs = false;
      forces.push_back(level);
      speeds.push_back(std::abs(out.speed));
      report.levels.push_back(out);
      report.rows.insert(report.rows.end(), rows.begin(), rows.end());
    }
    for (std::size_t i = 1; i < speeds.size(); ++i) {
      if (!(speeds[i] > speeds[i - 1])) report.strictly_increasing = false;
    }
    report.spearman.emplace_back(patch, spearman(forces, speeds));
  }
  return report;
}

ReplayReport evaluate_replay(const AppConfig& config, std::span<const MemoryBank> banks, const Recording& rec,
                             std::uint32_t episode, std::optional<double> beta, std::uint64_t seed) {
  ReplayReport report;
  report.tolerance = resolution(config);
  std::vector<const Record*> records;
  for (const auto& r : rec.records) {
    if (r.episode == episode) records.push_back(&r);
  }
  if (records.size() < 2) fail(ErrorKind::data, "replay: episode has fewer than two records");

  Controller ctl(config, seed);
  for (const auto& b : banks) ctl.load_bank(b);
  ctl.set_beta(beta);
  ctl.reset(records.front()->joints);
  std::vector<JointAngles> expected;
  for (const Record* r : records) {
    expected.push_back(r->joints);
    std::vector<PatchFrame> frames;
    for (std::size_t p = 0; p < config.patches.size(); ++p) {
      const PatchSpec& spec = config.patches[p];
      const auto it = std::find(rec.patches.begin(), rec.patches.end(), spec.id);
      PatchFrame f{r->t, spec.id, {}, spec.axis, spec.theta_sign};
      if (it != rec.patches.end()) {
        f.cells = r->patches[static_cast<std::size_t>(it - rec.patches.begin())].cells;
      } else {
        f.cells.assign(spec.cells, CellForces{});
      }
      frames.push_back(std::move(f));
    }
    report.rows.push_back(ctl.tick_frames(frames));
  }
  score(report, report.rows, 0, expected);
  return report;
}

Recording sequence_recording(const AppConfig& config, const SequenceSpec& spec, std::uint64_t seed) {
  Recording rec = empty_recording(config);
  scripted_sequence(config, spec, seed, rec);
  return rec;
}

DispatchSetup default_dispatch() {
  auto v = [](double a, double b, double c) {
    JointAngles x(3);
    x << a, b, c;
    return x;
  };
  DispatchSetup s;
  s.reach = {{v(-0.5, -2.0, -1.0), v(-0.2, -1.6, -0.6), v(0.1, -1.3, -0.2), v(0.4, -1.0, 0.3)}, 13, "wrist_upper", 8.0};
  s.grasp = {{v(0.4, -1.0, 0.3), v(0.3, -0.7, 0.7), v(0.0, -0.5, 1.1), v(-0.3, -0.8, 0.9)}, 13, "wrist_right", 8.0};
  return s;
}

DispatchReport evaluate_dispatch(const AppConfig& config, const DispatchSetup& setup, std::uint64_t seed) {
  DispatchReport report;
  const Recording reach_rec = sequence_recording(config, setup.reach, seed);
  const Recording grasp_rec = sequence_recording(config, setup.grasp, seed + 1);
  const std::vector<MemoryBank> banks = {
      train_from_recordings(std::span(&reach_rec, 1), config, setup.reach.patch, setup.beta),
      train_from_recordings(std::span(&grasp_rec, 1), config, setup.grasp.patch, setup.beta)};

  const auto reach_states = interpolate_waypoints(setup.reach.waypoints, setup.reach.segment_ticks);
  const auto grasp_states = interpolate_waypoints(setup.grasp.waypoints, setup.grasp.segment_ticks);
  const double dt = config.tick_period();
  const double reach_start = 0.0;
  const double reach_len = static_cast<double>(reach_states.size()) * dt;
  const double gap_len = static_cast<double>(setup.gap_ticks) * dt;
  const double grasp_start = reach_len + gap_len;
  const double grasp_len = static_cast<double>(grasp_states.size()) * dt;

  ClosedLoopSpec spec;
  spec.start = reach_states.front();
  spec.script = {{setup.reach.patch, setup.reach.magnitude, reach_start, reach_len},
                 {setup.grasp.patch, setup.grasp.magnitude, grasp_start, grasp_len}};
  spec.duration = grasp_start + grasp_len;
  spec.seed = seed + 2;
  report.rows = run_closed_loop(config, banks, spec);

  const auto tol = resolution(config);
  report.reach.tolerance = tol;
  report.grasp.tolerance = tol;
  score(report.reach, report.rows, 0, reach_states);
  score(report.grasp, report.rows, reach_states.size() + setup.gap_ticks, grasp_states);
  for (std::size_t k = reach_states.size(); k < reach_states.size() + setup.gap_ticks; ++k) {
    report.gap_max_speed = std::max(report.gap_max_speed, report.rows[k].velocity.cwiseAbs().maxCoeff());
  }
  return report;
}

}  // namespace hasm
