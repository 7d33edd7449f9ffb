#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "hasm/config.hpp"
#include "hasm/error.hpp"
#include "hasm/sim.hpp"
#include "hasm/tactile.hpp"

namespace hasm {
namespace {

AppConfig noiseless() {
  AppConfig c = default_config();
  c.sim.touch_noise = 0.0;
  return c;
}

JointAngles angles(std::initializer_list<double> v) {
  JointAngles x(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double a : v) x[i++] = a;
  return x;
}

TEST(Sim, SweepPlateauVelocityIsProportionalToForce) {
  const AppConfig cfg = noiseless();
  const double oracle[] = {0.1, 0.2, 0.4};  // 2, 4, 8 N at 0.05 rad/s per N
  const double forces[] = {2.0, 4.0, 8.0};
  for (int i = 0; i < 3; ++i) {
    Recording rec = empty_recording(cfg);
    scripted_sweep(cfg, {"arm_flex", -1, "wrist_upper", {{forces[i], 2.0}}, std::nullopt}, 1, rec);
    ASSERT_GT(rec.records.size(), 20u);
    const double dt = cfg.tick_period();
    for (std::size_t k = 5; k < 20; ++k) {
      const double v = (rec.records[k + 1].joints[1] - rec.records[k].joints[1]) / dt;
      EXPECT_NEAR(v, -oracle[i], 1e-9) << forces[i] << " N";
    }
  }
}

TEST(Sim, ZeroTouchLeavesArmStill) {
  const AppConfig cfg = noiseless();
  Recording rec = empty_recording(cfg);
  scripted_sweep(cfg, {"arm_flex", -1, "wrist_upper", {{0.0, 1.0}}, std::nullopt}, 1, rec);
  for (const auto& r : rec.records) EXPECT_EQ(r.joints, rec.records.front().joints);
}

TEST(Sim, ForceSpreadsEvenlyOverCells) {
  const AppConfig cfg = noiseless();
  World w(cfg, 1);
  std::vector<double> mags(cfg.patches.size(), 0.0);
  mags[0] = 6.0;
  const auto frames = w.sense(mags);
  ASSERT_EQ(frames.size(), cfg.patches.size());
  ASSERT_EQ(frames[0].cells.size(), 3u);
  for (const auto& c : frames[0].cells) EXPECT_DOUBLE_EQ(l1_magnitude(c), 2.0);
  for (const auto& c : frames[1].cells) EXPECT_DOUBLE_EQ(l1_magnitude(c), 0.0);
  EXPECT_EQ(frames[0].patch_id, cfg.patches[0].id);
}

TEST(Sim, NoiseIsSeededAndReproducible) {
  const AppConfig cfg = default_config();
  World a(cfg, 42), b(cfg, 42), c(cfg, 43);
  const std::vector<double> mags(cfg.patches.size(), 3.0);
  const auto fa = a.sense(mags), fb = b.sense(mags), fc = c.sense(mags);
  EXPECT_EQ(fa[0].cells[0].f1, fb[0].cells[0].f1);
  EXPECT_NE(fa[0].cells[0].f1, fc[0].cells[0].f1);
}

TEST(Sim, TickIsVelocityLimitedAndClamped) {
  const AppConfig cfg = noiseless();
  World w(cfg, 1);
  w.reset(angles({0.0, -1.0, 1.88}));
  w.tick(angles({1.0, -1.0, 5.0}));
  EXPECT_NEAR(w.angles()[0], 0.04, 1e-15);
  EXPECT_NEAR(w.angles()[2], 1.9, 1e-15);
  w.tick(std::nullopt);
  EXPECT_NEAR(w.angles()[0], 0.04, 1e-15);
  EXPECT_NEAR(w.time(), 2 * cfg.tick_period(), 1e-15);
}

TEST(Sim, TouchScriptWindows) {
  const AppConfig cfg = default_config();
  const TouchScript script = {{"wrist_left", 3.0, 0.1, 0.2}, {"wrist_left", 1.0, 0.2, 0.5}};
  const auto idx = cfg.patch_index("wrist_left");
  EXPECT_EQ(touch_magnitudes(script, cfg, 0.05)[idx], 0.0);
  EXPECT_EQ(touch_magnitudes(script, cfg, 0.1)[idx], 3.0);
  EXPECT_EQ(touch_magnitudes(script, cfg, 0.25)[idx], 4.0);
  EXPECT_EQ(touch_magnitudes(script, cfg, 0.3)[idx], 1.0);
}

TEST(Sim, InterpolationMatchesOracle) {
  const std::vector<JointAngles> wp = {angles({0.0, -1.0, 0.0}), angles({0.5, -1.5, 0.2}), angles({0.1, -0.5, 1.0}),
                                       angles({-0.4, -0.2, 0.6})};
  const auto states = interpolate_waypoints(wp, 5);
  ASSERT_EQ(states.size(), 16u);
  EXPECT_LE((states[6] - angles({0.42, -1.3, 0.36})).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LE((states[12] - angles({-0.1, -0.38, 0.84})).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_EQ(states.front(), wp.front());
  EXPECT_EQ(states.back(), wp.back());
}

TEST(Sim, SequenceRecordsOneRowPerState) {
  const AppConfig cfg = noiseless();
  const SequenceSpec spec{{angles({0.0, -1.0, 0.0}), angles({0.3, -1.2, 0.1})}, 10, "wrist_left", 8.0};
  Recording rec = empty_recording(cfg);
  scripted_sequence(cfg, spec, 1, rec);
  ASSERT_EQ(rec.records.size(), 11u);
  rec.validate();
  for (std::size_t k = 1; k < rec.records.size(); ++k) EXPECT_GT(rec.records[k].t, rec.records[k - 1].t);
}

TEST(Sim, UnknownJointIsConfigError) {
  const AppConfig cfg = noiseless();
  Recording rec = empty_recording(cfg);
  EXPECT_THROW(scripted_sweep(cfg, {"elbow", -1, "wrist_upper", {{2.0, 1.0}}, std::nullopt}, 1, rec), Error);
}

}  // namespace
}  // namespace hasm
