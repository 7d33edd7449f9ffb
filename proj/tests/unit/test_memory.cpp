#include <gtest/gtest.h>

#include <bit>
#include <cmath>
#include <random>
#include <vector>

#include "hasm/config.hpp"
#include "hasm/error.hpp"
#include "hasm/memory.hpp"

namespace hasm {
namespace {

JointAngles angles(std::initializer_list<double> v) {
  JointAngles x(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double a : v) x[i++] = a;
  return x;
}

// Oracle instance: five mutually orthogonal Walsh columns over 120 rows.
MemoryBank hadamard_bank(const AppConfig& cfg) {
  Eigen::MatrixXd m(120, 5), s(3, 5);
  for (int i = 0; i < 120; ++i) {
    for (int j = 0; j < 5; ++j) m(i, j) = std::popcount(static_cast<unsigned>(i & (j + 1))) % 2 ? -1.0 : 1.0;
  }
  for (int j = 0; j < 5; ++j) s.col(j) = angles({0.1 * j, -0.2 * j, 0.05 * j});
  return MemoryBank(m, s, 32.0, cfg.patches.front(), cfg.encoder());
}

TEST(Memory, BindIsElementwise) {
  Eigen::VectorXd a(4), b(4), e(4);
  a << 1, -1, 1, -1;
  b << 1, 1, -1, -1;
  e << 1, -1, -1, 1;
  EXPECT_EQ(bind(a, b), e);
  EXPECT_EQ(bind(bind(a, b), b), a);
  EXPECT_THROW(bind(a, Eigen::VectorXd::Ones(3)), Error);
}

TEST(Memory, PairingPicksNearestAndEarlierOnTies) {
  // Binary fractions keep the tie exact.
  const std::vector<StateSample> states = {{0.0, angles({0.0})}, {0.5, angles({1.0})}, {1.0, angles({2.0})}};
  const std::vector<TactileFeature> features = {{0.0625, 0.1}, {0.375, 0.2}, {0.625, 0.3}, {0.9375, 0.4}};
  PairingStats stats;
  const auto seqs = pair_samples(states, features, 0.125, &stats);
  ASSERT_EQ(seqs.size(), 1u);
  ASSERT_EQ(seqs[0].size(), 3u);
  EXPECT_EQ(seqs[0][0].rho, 0.1);
  EXPECT_EQ(seqs[0][1].rho, 0.2);  // 0.375 and 0.625 are equally close
  EXPECT_EQ(seqs[0][2].rho, 0.4);
  EXPECT_EQ(stats.paired, 3u);
}

TEST(Memory, UnpairedStatesSplitRuns) {
  const std::vector<StateSample> states = {
      {0.0, angles({0.0})}, {0.1, angles({0.1})}, {0.2, angles({0.2})}, {0.3, angles({0.3})}};
  const std::vector<TactileFeature> features = {{0.0, 0.5}, {0.1, 0.5}, {0.3, 0.5}};
  PairingStats stats;
  const auto seqs = pair_samples(states, features, 0.02, &stats);
  ASSERT_EQ(seqs.size(), 2u);
  EXPECT_EQ(seqs[0].size(), 2u);
  EXPECT_EQ(seqs[1].size(), 1u);
  EXPECT_EQ(stats.dropped, 1u);
}

TEST(Memory, NothingPairedIsDataError) {
  const std::vector<StateSample> states = {{0.0, angles({0.0})}};
  const std::vector<TactileFeature> features = {{1.0, 0.5}};
  try {
    pair_samples(states, features, 0.05);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::data);
    EXPECT_STREQ(e.what(), "no synchronized samples");
  }
}

TEST(Memory, TrainBuildsOneColumnPerTransition) {
  const AppConfig cfg = default_config();
  const Encoder enc(cfg.encoder());
  PairedSequence a, b, c;
  for (int t = 0; t < 5; ++t) a.push_back({t * 0.02, angles({0.0, -1.0 - 0.1 * t, 0.0}), 0.5});
  for (int t = 0; t < 3; ++t) b.push_back({t * 0.02, angles({0.2, -0.5, 0.1 * t}), 0.3});
  c.push_back({0.0, angles({0.0, -1.0, 0.0}), 0.3});
  const std::vector<PairedSequence> seqs = {a, b, c};
  TrainStats stats;
  const MemoryBank bank = train(seqs, enc, cfg.patches.front(), 32.0, &stats);
  EXPECT_EQ(bank.columns(), 6u);
  EXPECT_EQ(bank.dimension(), enc.dimension());
  EXPECT_EQ(stats.skipped, 1u);
  EXPECT_EQ(bank.s_shift().col(0), a[1].state);
  EXPECT_EQ(bank.s_shift().col(4), b[1].state);
  EXPECT_EQ(bank.m().col(0), enc.query(a[0].state, a[0].rho, cfg.patches.front()));
}

TEST(Memory, SingleColumnRecallReturnsItsShift) {
  const AppConfig cfg = default_config();
  const Encoder enc(cfg.encoder());
  const auto q = enc.query(cfg.home(), 0.4, cfg.patches.front());
  const MemoryBank bank(q, angles({0.3, -0.7, 0.2}), 32.0, cfg.patches.front(), cfg.encoder());
  const Decision d = recall_query(q, bank, 32.0);
  EXPECT_EQ(d.target, angles({0.3, -0.7, 0.2}));
  EXPECT_EQ(d.weights_entropy, 0.0);
}

TEST(Memory, OrthogonalBankRecallMatchesOracle) {
  const AppConfig cfg = default_config();
  const MemoryBank bank = hadamard_bank(cfg);
  const Eigen::VectorXd q = bank.m().col(2);
  const Eigen::VectorXd products = bank.m().transpose() * q;
  EXPECT_EQ(products, (Eigen::VectorXd(5) << 0, 0, 120, 0, 0).finished());
  const Decision d = recall_query(q, bank, 32.0);
  EXPECT_LE((d.target - angles({0.2, -0.4, 0.1})).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Memory, IdenticalKeysAverageTheirShifts) {
  const AppConfig cfg = default_config();
  const Encoder enc(cfg.encoder());
  const auto q = enc.query(cfg.home(), 0.4, cfg.patches.front());
  Eigen::MatrixXd m(q.size(), 2), s(3, 2);
  m << q, q;
  s << 0.0, 0.4, -1.0, -2.0, 0.2, 0.6;
  const MemoryBank bank(m, s, 8.0, cfg.patches.front(), cfg.encoder());
  const Decision d = recall_query(q, bank, 8.0);
  EXPECT_LE((d.target - angles({0.2, -1.5, 0.4})).norm(), 1e-12);
  EXPECT_NEAR(d.weights_entropy, std::log(2.0), 1e-12);
}

TEST(Memory, SoftmaxProperties) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g(0.0, 50.0);
  for (int c = 0; c < 100; ++c) {
    Eigen::VectorXd z(40);
    for (auto& v : z) v = g(rng);
    const auto w = softmax(z);
    EXPECT_NEAR(w.sum(), 1.0, 1e-12);
    EXPECT_GE(w.minCoeff(), 0.0);
    EXPECT_LE((softmax(z.array() + 1234.5).matrix() - w).cwiseAbs().maxCoeff(), 1e-12);
  }
  Eigen::VectorXd big(2);
  big << 1e6, 1e6 - 1.0;
  EXPECT_TRUE(softmax(big).allFinite());
}

TEST(Memory, TargetIsConvexCombination) {
  const AppConfig cfg = default_config();
  const MemoryBank bank = hadamard_bank(cfg);
  const Encoder enc(cfg.encoder());
  for (double beta : {0.01, 0.5, 4.0}) {
    const Decision d = recall_query(enc.query(cfg.home(), 0.7, cfg.patches.front()), bank, beta);
    for (Eigen::Index j = 0; j < 3; ++j) {
      EXPECT_GE(d.target[j], bank.s_shift().row(j).minCoeff() - 1e-12);
      EXPECT_LE(d.target[j], bank.s_shift().row(j).maxCoeff() + 1e-12);
    }
  }
}

TEST(Memory, EntropyFallsAsBetaRises) {
  const AppConfig cfg = default_config();
  const Encoder enc(cfg.encoder());
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::MatrixXd m(120, 50), s(3, 50);
  for (int c = 0; c < 50; ++c) {
    m.col(c) = enc.query(angles({u(rng) * 2 - 1, -u(rng) * 2.6, u(rng) * 3.8 - 1.9}), u(rng), cfg.patches.front());
    s.col(c) = angles({0.0, -1.0, 0.0});
  }
  const MemoryBank bank(m, s, 1.0, cfg.patches.front(), cfg.encoder());
  const auto q = enc.query(cfg.home(), 0.5, cfg.patches.front());
  double prev = std::log(50.0) + 1e-12;
  for (double beta : {0.1, 1.0, 4.0, 16.0, 64.0}) {
    const double h = recall_query(q, bank, beta).weights_entropy;
    EXPECT_LE(h, prev) << beta;
    prev = h;
  }
}

TEST(Memory, UntrainedBankIsStateError) {
  const Eigen::VectorXd q = Eigen::VectorXd::Ones(120);
  try {
    recall_query(q, MemoryBank(), 8.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::state);
  }
}

TEST(Memory, CommandIsRateLimitedAndClamped) {
  const std::vector<JointLimits> limits = {{-1.0, 1.0}, {-2.6, 0.0}, {-1.9, 1.9}};
  Decision d;
  d.target = angles({0.5, 0.3, -1.805});
  const JointAngles cmd = decision_to_command(d, angles({0.0, -0.02, -1.8}), 0.04, limits);
  EXPECT_DOUBLE_EQ(cmd[0], 0.04);
  EXPECT_DOUBLE_EQ(cmd[1], 0.0);
  EXPECT_DOUBLE_EQ(cmd[2], -1.805);
  EXPECT_THROW(decision_to_command(d, angles({0.0, 0.0}), 0.04, limits), Error);
}

TEST(Memory, BankRejectsMismatchedShapes) {
  const AppConfig cfg = default_config();
  EXPECT_THROW(MemoryBank(Eigen::MatrixXd::Ones(60, 2), Eigen::MatrixXd::Zero(3, 2), 8.0, cfg.patches.front(),
                          cfg.encoder()),
               Error);
  EXPECT_THROW(MemoryBank(Eigen::MatrixXd::Ones(120, 2), Eigen::MatrixXd::Zero(3, 3), 8.0, cfg.patches.front(),
                          cfg.encoder()),
               Error);
}

}  // namespace
}  // namespace hasm
