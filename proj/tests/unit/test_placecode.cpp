#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "hasm/config.hpp"
#include "hasm/encoder.hpp"
#include "hasm/error.hpp"
#include "hasm/log.hpp"
#include "hasm/placecode.hpp"

namespace hasm {
namespace {

// Frozen from tests/oracles/generate_oracles.py (numpy, independent of this code).
const std::vector<double> kTuningOracle = {
    0.0038659201394728076, 0.09499094514330542,   0.6027534393096305,   0.9877006582106026,
    0.41796426001611414,   0.04567526845073578,   0.0012889949855298029, 9.393977268078702e-06,
    1.767974267878006e-08, 8.592717469562724e-12};

struct CaptureLog {
  std::vector<std::string> warnings;
  CaptureLog() {
    set_log_sink([this](LogLevel level, std::string_view msg) {
      if (level == LogLevel::warning) warnings.emplace_back(msg);
    });
  }
  ~CaptureLog() { set_log_sink({}); }
};

TEST(PlaceCode, TuningMatchesOracle) {
  const JointTuning tuning({0.0, std::numbers::pi}, 10, 0.3);
  const auto r = tuning_response(1.0, tuning);
  ASSERT_EQ(r.size(), kTuningOracle.size());
  for (std::size_t i = 0; i < r.size(); ++i) EXPECT_NEAR(r[i], kTuningOracle[i], 1e-12) << i;
}

TEST(PlaceCode, QuantizeExamples) {
  EXPECT_EQ(quantize_rate(0.60653, 4), (std::vector<int>{1, -1, -1, 1}));
  EXPECT_EQ(quantize_level(1.0, 4), 15u);
  EXPECT_EQ(quantize_level(0.0, 4), 0u);
  EXPECT_EQ(quantize_rate(0.0, 3), (std::vector<int>{-1, -1, -1}));
  EXPECT_EQ(quantize_rate(1.0, 3), (std::vector<int>{1, 1, 1}));
}

TEST(PlaceCode, QuantizeMonotone) {
  for (unsigned n : {1u, 2u, 4u, 8u}) {
    std::uint64_t prev = 0;
    for (int i = 0; i <= 1000; ++i) {
      const auto level = quantize_level(i / 1000.0, n);
      EXPECT_GE(level, prev);
      EXPECT_LE(level, (1ull << n) - 1);
      prev = level;
    }
  }
}

TEST(PlaceCode, QuantizeClampsWithWarning) {
  CaptureLog log;
  EXPECT_EQ(quantize_level(1.5, 4), 15u);
  EXPECT_EQ(quantize_level(-0.5, 4), 0u);
  EXPECT_EQ(log.warnings.size(), 2u);
}

TEST(PlaceCode, SmallEncodeExample) {
  const std::vector<JointTuning> t = {JointTuning({0.0, 1.0}, 2, 0.1)};
  JointAngles x(1);
  x << 0.0;
  const auto code = encode_joints(x, t, 1);
  ASSERT_EQ(code.bits.size(), 2);
  EXPECT_EQ(code.bits[0], 1.0);
  EXPECT_EQ(code.bits[1], -1.0);
}

TEST(PlaceCode, OutOfRangeAngleIsClampedAndWarned) {
  CaptureLog log;
  const auto tuning = JointTuning::evenly_spaced({0.0, 1.0}, 5, 1.5);
  const auto inside = tuning_response(1.0, tuning);
  const auto outside = tuning_response(3.0, tuning);
  EXPECT_EQ(inside, outside);
  EXPECT_FALSE(log.warnings.empty());
}

TEST(PlaceCode, CodeIsBipolarWithExpectedLength) {
  const AppConfig cfg = default_config();
  const Encoder enc(cfg.encoder());
  const auto code = enc.place().encode(cfg.home());
  EXPECT_EQ(static_cast<std::size_t>(code.bits.size()), enc.dimension());
  EXPECT_EQ(enc.dimension(), 4u * 10u * 3u);
  for (Eigen::Index i = 0; i < code.bits.size(); ++i) EXPECT_EQ(std::abs(code.bits[i]), 1.0);
}

// With binary quantization the Hamming distance between codes never shrinks
// as two states move apart along a joint.
TEST(PlaceCode, LocalityAtOneBit) {
  const std::vector<JointTuning> t = {JointTuning::evenly_spaced({-1.0, 1.0}, 10, 1.5)};
  const PlaceEncoder enc(t, 1);
  JointAngles a(1), b(1);
  a << -1.0;
  const auto base = enc.encode(a).bits;
  int prev = 0;
  for (int i = 0; i <= 400; ++i) {
    b << -1.0 + i * 0.005;
    const auto code = enc.encode(b).bits;
    const int hamming = static_cast<int>(((code - base).array() != 0.0).count());
    EXPECT_GE(hamming, prev) << b[0];
    prev = hamming;
  }
  EXPECT_GT(prev, 0);
}

TEST(PlaceCode, ResolutionIsRangeOverLevels) {
  const std::vector<JointTuning> t = {JointTuning::evenly_spaced({-2.0, 2.0}, 10, 1.5)};
  EXPECT_DOUBLE_EQ(PlaceEncoder(t, 4).resolution(0), 4.0 / 16.0);
}

TEST(PlaceCode, DimensionNotMultipleOfThreeIsConfigError) {
  AppConfig cfg = default_config();
  cfg.place.neurons_per_joint = 5;
  cfg.place.bits = 1;
  cfg.joints.pop_back();  // 1 * 5 * 2 = 10
  try {
    cfg.encoder().validate();
    FAIL() << "expected a config error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::config);
  }
}

TEST(PlaceCode, JointCountMismatchIsDimensionError) {
  const Encoder enc(default_config().encoder());
  JointAngles x(2);
  x << 0.0, -1.0;
  EXPECT_THROW(enc.place().encode(x), Error);
}

}  // namespace
}  // namespace hasm
