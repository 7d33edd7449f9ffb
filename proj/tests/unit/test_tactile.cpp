#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "hasm/error.hpp"
#include "hasm/placecode.hpp"
#include "hasm/tactile.hpp"

namespace hasm {
namespace {

int count_spikes(double current, double dt_ms, double duration_ms) {
  const IzhikevichParams p;
  IzhikevichState s = IzhikevichState::resting(p);
  int n = 0;
  const int steps = static_cast<int>(std::lround(duration_ms / dt_ms));
  for (int k = 0; k < steps; ++k) {
    const auto r = izhikevich_step(s, current, p, dt_ms);
    s = r.state;
    n += r.spiked ? 1 : 0;
  }
  return n;
}

PatchFrame uniform_frame(double t, double per_component, std::size_t cells = 3) {
  PatchFrame f;
  f.timestamp = t;
  f.patch_id = "p";
  f.cells.assign(cells, CellForces{per_component, per_component, per_component});
  return f;
}

TEST(Tactile, MagnitudeAndThreshold) {
  EXPECT_DOUBLE_EQ(l1_magnitude({1.0, -2.0, 0.5}), 3.5);
  EXPECT_DOUBLE_EQ(soft_threshold(0.2, 0.3), 0.0);
  EXPECT_DOUBLE_EQ(soft_threshold(2.0, 0.3), 1.7);
}

TEST(Tactile, WindowIsInclusiveOnBothEnds) {
  const std::vector<ForceSample> s = {{0.00, 1.0}, {0.02, 2.0}, {0.04, 4.0}, {0.06, 8.0}};
  EXPECT_DOUBLE_EQ(accumulate_window(s, 0.06, 0.04), 14.0);
  EXPECT_DOUBLE_EQ(accumulate_window(s, 0.04, 0.05), 7.0);
  EXPECT_DOUBLE_EQ(accumulate_window(s, 0.10, 0.01), 0.0);
}

TEST(Tactile, RestingPointIsQuiet) {
  const IzhikevichParams p;
  IzhikevichState s = IzhikevichState::resting(p);
  EXPECT_NEAR(s.v, -70.0, 1e-9);
  EXPECT_NEAR(s.u, -14.0, 1e-9);
  for (int k = 0; k < 1000; ++k) {
    const auto r = izhikevich_step(s, 0.0, p, 0.5);
    EXPECT_FALSE(r.spiked);
    s = r.state;
  }
  EXPECT_NEAR(s.v, -70.0, 1e-9);
}

TEST(Tactile, SpikeCountMatchesOracle) {
  EXPECT_NEAR(count_spikes(10.0, 0.1, 1000.0), 289, 2);
  const int oracle[] = {0, 0, 0, 10, 72, 129, 161, 189, 208, 229, 256, 258, 292};
  for (int i = 0; i <= 12; ++i) EXPECT_EQ(count_spikes(i, 0.5, 1000.0), oracle[i]) << "I=" << i;
}

TEST(Tactile, ResetAfterThreshold) {
  const IzhikevichParams p;
  const auto r = izhikevich_step({35.0, 0.0}, 0.0, p, 0.5);
  EXPECT_TRUE(r.spiked);
  EXPECT_DOUBLE_EQ(r.state.v, p.c);
}

TEST(Tactile, DivergenceIsReset) {
  const IzhikevichParams p;
  const auto r = izhikevich_step({std::nan(""), 0.0}, 0.0, p, 0.5);
  EXPECT_TRUE(r.diverged);
  EXPECT_TRUE(std::isfinite(r.state.v));
}

TEST(Tactile, RateAndDensity) {
  const std::vector<double> spikes = {0.70, 0.80, 0.90, 1.00};
  EXPECT_DOUBLE_EQ(spike_rate(spikes, 1.0, 0.25), 12.0);  // 0.80, 0.90, 1.00
  EXPECT_DOUBLE_EQ(density(350.0, 700.0), 0.5);
  EXPECT_DOUBLE_EQ(density(900.0, 700.0), 1.0);
  EXPECT_DOUBLE_EQ(density(-1.0, 700.0), 0.0);
}

// Mean density over the last second, so the phase of the rate window does not
// matter; one spike per window of slack as the neuron saturates.
TEST(Tactile, DensityMonotoneInForce) {
  TactileConfig cfg;
  double prev = -1.0;
  for (int level = 1; level <= 20; ++level) {
    PatchEncoder enc(cfg, 0.02);
    double sum = 0.0;
    for (int k = 0; k < 150; ++k) {
      const auto s = enc.step(uniform_frame(k * 0.02, level / 9.0));
      if (k >= 100) sum += s.rho;
    }
    const double mean = sum / 50.0;
    EXPECT_GE(mean, prev - 1.0 / (cfg.rate_window * cfg.max_rate)) << level << " N";
    prev = mean;
  }
  EXPECT_GT(prev, 0.0);
}

TEST(Tactile, NoTouchNoSpikes) {
  PatchEncoder enc(TactileConfig{}, 0.02);
  for (int k = 0; k < 100; ++k) {
    const auto s = enc.step(uniform_frame(k * 0.02, 0.05));  // below threshold
    EXPECT_EQ(s.spikes, 0);
    EXPECT_EQ(s.f_total, 0.0);
  }
}

TEST(Tactile, TimestampsMustIncrease) {
  PatchEncoder enc(TactileConfig{}, 0.02);
  enc.step(uniform_frame(0.10, 1.0));
  try {
    enc.step(uniform_frame(0.10, 1.0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::data);
  }
}

TEST(Tactile, HalfDensityFlipsTopFiveNeurons) {
  const std::vector<JointTuning> t = {JointTuning::evenly_spaced({0.0, std::numbers::pi}, 10, 1.5)};
  JointAngles x(1);
  x << 1.0;
  const PlaceCode code = encode_joints(x, t, 1);
  const Eigen::VectorXd f = expanded_force_vector(0.5, code);
  ASSERT_EQ(f.size(), 10);
  for (int i = 0; i < 10; ++i) EXPECT_EQ(f[i], (i >= 1 && i <= 5) ? 1.0 : -1.0) << i;

  const PlaceCode wide = encode_joints(x, t, 3);
  const Eigen::VectorXd g = expanded_force_vector(0.5, wide);
  ASSERT_EQ(g.size(), 30);
  for (int i = 0; i < 30; ++i) EXPECT_EQ(g[i], f[i / 3]);
}

TEST(Tactile, ExtremeDensities) {
  const std::vector<JointTuning> t = {JointTuning::evenly_spaced({0.0, 1.0}, 6, 1.5)};
  JointAngles x(1);
  x << 0.3;
  const PlaceCode code = encode_joints(x, t, 1);
  EXPECT_EQ(expanded_force_vector(0.0, code), Eigen::VectorXd::Constant(6, -1.0));
  EXPECT_EQ(expanded_force_vector(1.0, code), Eigen::VectorXd::Ones(6));
}

TEST(Tactile, EmbeddingPreservesNorm) {
  const std::vector<JointTuning> t(3, JointTuning::evenly_spaced({-1.0, 1.0}, 10, 1.5));
  JointAngles x(3);
  x << 0.1, -0.4, 0.9;
  const PlaceCode code = encode_joints(x, t, 4);
  for (double rho : {0.0, 0.25, 0.6, 1.0}) {
    const auto e = build_embedding(rho, code, Vec3::UnitZ(), -1);
    EXPECT_NEAR(e.norm(), std::sqrt(120.0), 1e-9);
  }
  EXPECT_DOUBLE_EQ(embedding_angle(0.5, -1), -std::numbers::pi / 4);
}

}  // namespace
}  // namespace hasm
