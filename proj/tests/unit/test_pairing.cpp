#include "mpqkd/pairing.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <memory>
#include <random>
#include <vector>

using namespace mpqkd;
using namespace mpqkd::pairing;

namespace {

std::vector<bool> clicks(std::initializer_list<int> c) {
  std::vector<bool> out;
  for (int x : c) out.push_back(x != 0);
  return out;
}

std::vector<RoundPair> box2(const std::vector<bool>& c, std::uint64_t l) {
  // std::vector<bool> has no contiguous storage.
  std::unique_ptr<bool[]> buf(new bool[c.size()]);
  for (std::size_t i = 0; i < c.size(); ++i) buf[i] = c[i];
  return pair_box2(std::span<const bool>(buf.get(), c.size()), l);
}

Box7Pairs box7(const std::vector<bool>& c, const std::vector<Window>& a, const std::vector<Window>& b,
               std::uint64_t l) {
  std::unique_ptr<bool[]> buf(new bool[c.size()]);
  for (std::size_t i = 0; i < c.size(); ++i) buf[i] = c[i];
  return pair_box7(std::span<const bool>(buf.get(), c.size()), a, b, l);
}

// Stationary pairs per round from the Markov chain of each rule. States:
// nothing open, a round open with the next gap t = 1..l, and (simple rule
// only) a stale open round whose partner will be discarded with it.
double markov_rate(double p, int l, bool replacing) {
  std::vector<double> open(static_cast<std::size_t>(l) + 1, 0.0);
  double none = 1.0;
  double stale = 0.0;
  double rate = 0.0;
  for (int it = 0; it < 100000; ++it) {
    std::vector<double> next(open.size(), 0.0);
    double next_none = none * (1.0 - p);
    double next_stale = stale * (1.0 - p);
    next_none += stale * p;
    next[1] += none * p;
    double pairs = 0.0;
    for (int t = 1; t <= l; ++t) {
      const double w = open[static_cast<std::size_t>(t)];
      pairs += w * p;
      next_none += w * p;
      if (t < l) {
        next[static_cast<std::size_t>(t) + 1] += w * (1.0 - p);
      } else if (replacing) {
        next_none += w * (1.0 - p);
      } else {
        next_stale += w * (1.0 - p);
      }
    }
    open = std::move(next);
    none = next_none;
    stale = next_stale;
    rate = pairs;
  }
  return rate;
}

}  // namespace

TEST(Box2, HandTraces) {
  EXPECT_EQ(box2(clicks({1, 0, 1, 1, 0, 1}), 2), (std::vector<RoundPair>{{1, 3}, {4, 6}}));
  EXPECT_TRUE(box2(clicks({1, 0, 0, 0, 1}), 3).empty());
  EXPECT_TRUE(box2(clicks({0, 0, 0, 0}), 5).empty());
  // Double discard: after the late round both are dropped, so 6 and 7 pair.
  EXPECT_EQ(box2(clicks({1, 0, 0, 0, 1, 1, 1}), 3), (std::vector<RoundPair>{{6, 7}}));
}

TEST(Box2, PusherState) {
  Box2Pairer p(2);
  EXPECT_FALSE(p.push(1));
  EXPECT_EQ(p.open(), 1u);
  EXPECT_FALSE(p.push(5));
  EXPECT_FALSE(p.open());
  EXPECT_THROW(p.push(0), std::invalid_argument);
  EXPECT_THROW(Box2Pairer(0), std::invalid_argument);
}

TEST(Box7, HandTraces) {
  const std::vector<Window> zz(4, Window::Z);
  const auto z = box7(clicks({1, 1, 1, 1}), zz, zz, 1);
  EXPECT_EQ(z.z, (std::vector<RoundPair>{{1, 2}, {3, 4}}));
  EXPECT_TRUE(z.x.empty());

  const std::vector<Window> xx(5, Window::X);
  Box7Pairer pairer(3);
  const auto c = clicks({1, 0, 0, 0, 1});
  for (std::size_t i = 0; i < c.size(); ++i)
    if (c[i]) {
      EXPECT_FALSE(pairer.push(i + 1, Window::X, Window::X).pair);
    }
  EXPECT_EQ(pairer.open_x(), 5u);
  EXPECT_TRUE(box7(c, xx, xx, 3).x.empty());

  const std::vector<Window> none(3, Window::X);
  const auto empty = box7(clicks({0, 0, 0}), none, none, 2);
  EXPECT_TRUE(empty.x.empty());
  EXPECT_TRUE(empty.z.empty());
}

TEST(Box7, MixedWindowsAreSkipped) {
  const std::vector<Window> a{Window::Z, Window::X, Window::Z, Window::X, Window::X, Window::Z};
  const std::vector<Window> b{Window::Z, Window::Z, Window::Z, Window::X, Window::X, Window::X};
  const auto p = box7(clicks({1, 1, 1, 1, 1, 1}), a, b, 10);
  EXPECT_EQ(p.z, (std::vector<RoundPair>{{1, 3}}));
  EXPECT_EQ(p.x, (std::vector<RoundPair>{{4, 5}}));
}

TEST(Box7, ZStreamEqualsUnboundedBox2OnZRounds) {
  std::mt19937_64 rng(7);
  std::bernoulli_distribution click(0.3), zwin(0.5);
  const std::size_t n = 5000;
  std::vector<bool> c(n), zz(n);
  std::vector<Window> a(n), b(n);
  for (std::size_t i = 0; i < n; ++i) {
    c[i] = click(rng);
    a[i] = zwin(rng) ? Window::Z : Window::X;
    b[i] = zwin(rng) ? Window::Z : Window::X;
    zz[i] = c[i] && a[i] == Window::Z && b[i] == Window::Z;
  }
  EXPECT_EQ(box7(c, a, b, 3).z, box2(zz, kUnbounded));
}

TEST(PairingRate, Examples) {
  EXPECT_DOUBLE_EQ(pairing_rate(1.0, 1), 0.5);
  EXPECT_NEAR(pairing_rate(0.5, 1), 1.0 / 6.0, 1e-15);
  EXPECT_NEAR(pairing_rate(0.01, kUnbounded), 0.005, 1e-15);
  EXPECT_NEAR(pairing_rate(0.01, 100000), 0.005, 1e-15);
  EXPECT_DOUBLE_EQ(pairing_rate(0.0, 10), 0.0);
  EXPECT_NEAR(pairing_rate_box2(0.5, 1), 0.125, 1e-15);
  EXPECT_THROW(pairing_rate(0.1, 0), std::invalid_argument);
}

TEST(PairingRate, MatchesMarkovChain) {
  for (const double p : {0.05, 0.2, 0.7})
    for (const int l : {1, 3, 12}) {
      EXPECT_NEAR(pairing_rate(p, static_cast<std::uint64_t>(l)), markov_rate(p, l, true), 1e-12) << p << " " << l;
      EXPECT_NEAR(pairing_rate_box2(p, static_cast<std::uint64_t>(l)), markov_rate(p, l, false), 1e-12)
          << p << " " << l;
    }
}

TEST(PairingRate, SmallProbabilityKeepsPrecision) {
  // q = 1 - (1-p)^l ~ p l for tiny p.
  const double p = 1e-12;
  EXPECT_NEAR(pairing_rate(p, 10) / (p * p * 10.0), 1.0, 1e-6);
}

namespace {

struct Counts {
  double box2 = 0.0;
  double box7 = 0.0;
};

Counts run(double p, std::uint64_t l, std::size_t n, std::mt19937_64& rng) {
  std::bernoulli_distribution click(p);
  Box2Pairer b2(l);
  Box7Pairer b7(l);
  Counts c;
  for (std::size_t i = 1; i <= n; ++i) {
    if (!click(rng)) continue;
    if (b2.push(i)) c.box2 += 1.0;
    if (b7.push(i, Window::X, Window::X).pair) c.box7 += 1.0;
  }
  return c;
}

}  // namespace

TEST(PairingRate, RenewalSigmaMatchesReplicates) {
  std::mt19937_64 rng(11);
  for (const auto& [p, l] : {std::pair{0.1, std::uint64_t{10}}, std::pair{0.01, std::uint64_t{100}}}) {
    const std::size_t n = 20000;
    const int reps = 800;
    double s7 = 0.0, ss7 = 0.0, s2 = 0.0, ss2 = 0.0;
    for (int r = 0; r < reps; ++r) {
      const auto c = run(p, l, n, rng);
      s7 += c.box7;
      ss7 += c.box7 * c.box7;
      s2 += c.box2;
      ss2 += c.box2 * c.box2;
    }
    const double var7 = ss7 / reps - (s7 / reps) * (s7 / reps);
    const double var2 = ss2 / reps - (s2 / reps) * (s2 / reps);
    const double sd7 = pair_count_sigma(p, l, n);
    const double sd2 = pair_count_sigma_box2(p, l, n);
    // Sample variance of 800 replicates carries ~5% relative noise.
    EXPECT_NEAR(var7 / (sd7 * sd7), 1.0, 0.2) << p << " " << l;
    EXPECT_NEAR(var2 / (sd2 * sd2), 1.0, 0.2) << p << " " << l;
    EXPECT_NEAR(s7 / reps / n, pairing_rate(p, l), 4.0 * sd7 / n / std::sqrt(reps));
    EXPECT_NEAR(s2 / reps / n, pairing_rate_box2(p, l), 4.0 * sd2 / n / std::sqrt(reps));
  }
}

TEST(PairingRate, AgreesWithBernoulliStreams) {
  std::mt19937_64 rng(2024);
  for (const double p : {0.001, 0.01, 0.1})
    for (const std::uint64_t l : {1u, 10u, 100u, 1000u}) {
      const std::size_t n = 1000000;
      const auto c = run(p, l, n, rng);
      EXPECT_LE(std::abs(c.box7 - n * pairing_rate(p, l)), 4.0 * pair_count_sigma(p, l, n)) << p << " " << l;
      EXPECT_LE(std::abs(c.box2 - n * pairing_rate_box2(p, l)), 4.0 * pair_count_sigma_box2(p, l, n))
          << p << " " << l;
    }
}

TEST(PEffective, WeightsOverWindows) {
  GainTables g;
  EXPECT_DOUBLE_EQ(p_effective(g, 0.5), 0.0);
  // Every source pair effective with probability 1.
  for (auto& a : g.qz)
    for (auto& b : a) b[RoundOutcome::of(1, 0).code] = 1.0;
  EXPECT_NEAR(p_effective(g, 0.3), 1.0, 1e-15);
  EXPECT_NEAR(p_effective_z(g, 0.3), 0.09, 1e-15);
}
