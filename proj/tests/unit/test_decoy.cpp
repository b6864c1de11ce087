#include "mpqkd/decoy.hpp"

#include "mpqkd/channel.hpp"
#include "mpqkd/keyrate.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <numbers>

using namespace mpqkd;
using namespace mpqkd::decoy;

namespace {

constexpr double kMu = 0.429;
constexpr double kNu = 0.038;

channel::ChannelParams at_distance(double arm_km) {
  channel::ChannelParams p;
  p.distance_km = arm_km;
  return p;
}

}  // namespace

TEST(BoundYx11, Examples) {
  EXPECT_DOUBLE_EQ(bound_yx11_upper(0.0, 0.0, 0.0, 0.0, kNu), 0.0);
  const double p1 = oracle::poisson(2.0 * kNu, 1);
  EXPECT_NEAR(bound_yx11_upper(p1 * p1, 0.0, 0.0, 0.0, kNu), 1.0, 1e-13);
  ClampLog log;
  EXPECT_DOUBLE_EQ(bound_yx11_upper(1.0, 0.0, 0.0, 0.0, kNu, &log), 1.0);
  EXPECT_EQ(log.upper, 1);
}

TEST(BoundYx11, InvertsSyntheticMixture) {
  // Gains built from photon-number yields Y_{mn} = 0.01 (m + 1)(n + 2) / 50;
  // the bound equals sum_{m,n>=1} p_m p_n Y_mn / p_1^2.
  auto y = [](int m, int n) { return 0.01 * (m + 1) * (n + 2) / 50.0; };
  const double lam = 2.0 * kNu;
  double qdd = 0.0, q0d = 0.0, qd0 = 0.0, tail = 0.0;
  for (int m = 0; m < 30; ++m)
    for (int n = 0; n < 30; ++n) {
      const double w = oracle::poisson(lam, m) * oracle::poisson(lam, n);
      qdd += w * y(m, n);
      if (m >= 1 && n >= 1) tail += w * y(m, n);
    }
  for (int n = 0; n < 30; ++n) q0d += oracle::poisson(lam, n) * y(0, n);
  for (int m = 0; m < 30; ++m) qd0 += oracle::poisson(lam, m) * y(m, 0);
  const double p1 = oracle::poisson(lam, 1);
  EXPECT_NEAR(bound_yx11_upper(qdd, q0d, qd0, y(0, 0), kNu), tail / (p1 * p1), 1e-13);
  EXPECT_GE(bound_yx11_upper(qdd, q0d, qd0, y(0, 0), kNu), y(1, 1));
}

TEST(BoundYz, Examples) {
  EXPECT_DOUBLE_EQ(bound_yz_single_lower(0.0, 0.0, 0.0, kMu, kNu), 0.0);
  for (const double y : {0.0, 1e-6, 0.013, 0.5, 1.0}) {
    const double q_nu = oracle::poisson(kNu, 1) * y;
    const double q_mu = oracle::poisson(kMu, 1) * y;
    EXPECT_NEAR(bound_yz_single_lower(q_nu, q_mu, 0.0, kMu, kNu), y, 1e-13);
  }
  EXPECT_THROW(bound_yz_single_lower(0.1, 0.1, 0.0, 0.2, 0.2), std::invalid_argument);
  try {
    bound_yz_single_lower(0.1, 0.1, 0.0, 0.2, 0.2);
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("degenerate decoy system"), std::string::npos);
  }
}

TEST(BoundYz, NegativeEstimateIsClampedAndLogged) {
  ClampLog log;
  EXPECT_DOUBLE_EQ(bound_yz_single_lower(0.0, 0.1, 0.0, kMu, kNu, &log), 0.0);
  EXPECT_EQ(log.lower, 1);
}

TEST(S11z, Enumeration) {
  EXPECT_DOUBLE_EQ(s11z([](int, int, RoundOutcome) { return 0.0; }), 0.0);
  // |X| = 4 lambdas times |X| = 4 patterns, weight 1/4 each.
  EXPECT_DOUBLE_EQ(s11z([](int, int, RoundOutcome) { return 1.0; }), 4.0);
  // Only patterns with one click per round enter.
  const double only_effective = s11z([](int, int, RoundOutcome o) { return o.effective() ? 1.0 : 0.0; });
  EXPECT_DOUBLE_EQ(only_effective, 4.0);
}

TEST(Fractions, Examples) {
  GainTables g;
  g.mu = kMu;
  g.nu = kNu;
  // Distinct effective probabilities per (a, b) source pair.
  const double eff[3][3] = {{1e-3, 0.02, 0.004}, {0.03, 0.05, 0.02}, {0.005, 0.021, 0.006}};
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) {
      g.qz[a][b][RoundOutcome::of(1, 0).code] = 0.4 * eff[a][b];
      g.qz[a][b][RoundOutcome::of(0, 1).code] = 0.6 * eff[a][b];
    }
  const auto zero = fractions(0.01, g, 0.0, 0.5);
  EXPECT_DOUBLE_EQ(zero.q11z, 0.0);
  // p_z = 1: r_z is the X-restricted share of all Z-Z product gains.
  double p_eff = 0.0;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) p_eff += eff[a][b] / 4.0;
  double all = 0.0, restricted = 0.0;
  for (int l = 0; l < 16; ++l) {
    const int l1 = (l >> 3) & 1, l2 = (l >> 2) & 1, l3 = (l >> 1) & 1, l4 = l & 1;
    const double w = eff[l1][l3] * eff[l2][l4];
    all += w;
    if ((l1 ^ l2) == 1 && (l3 ^ l4) == 1) restricted += w;
  }
  const auto f = fractions(p_eff, g, 1e-3, 1.0);
  EXPECT_NEAR(f.r_z, restricted / all, 1e-14);
  const double p1 = oracle::poisson(kMu, 1);
  EXPECT_NEAR(f.q11z, p1 * p1 * 1e-3 / (4.0 * restricted / 16.0), 1e-12);
}

TEST(Estimate, SandwichAgainstTrueYields) {
  for (const double arm : {0.0, 25.0, 50.0, 100.0, 200.0}) {
    const auto povm = channel::build_round_povm(at_distance(arm), 20);
    const auto g = channel::gains_q(povm, kMu, kNu);
    const auto truth = channel::true_yields(povm);
    const auto e = estimate(g, 0.5, 2000);
    for (std::uint8_t o = 0; o < 4; ++o) {
      EXPECT_LE(e.yz10_lower[o], truth.z(1, 0, RoundOutcome{o}) + 1e-15) << arm;
      EXPECT_LE(e.yz01_lower[o], truth.z(0, 1, RoundOutcome{o}) + 1e-15) << arm;
    }
    for (int pa = 0; pa < 2; ++pa)
      for (int pb = 0; pb < 2; ++pb)
        for (int c = 0; c < 16; ++c) EXPECT_GE(e.yx11_upper[pa][pb][c], truth.yx11[pa][pb][c] - 1e-15) << arm;
    const double true_s = s11z([&](int a, int b, RoundOutcome o) { return truth.z(a, b, o); });
    EXPECT_LE(e.s11z_lower, true_s);
    EXPECT_GT(e.s11z_lower, 0.5 * true_s);
    EXPECT_GT(e.q11z, 0.0);
    EXPECT_LT(e.q11z, 1.0);
    EXPECT_DOUBLE_EQ(e.q11z_star, e.q11z);
  }
}
