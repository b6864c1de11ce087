#include "mpqkd/pairing.hpp"

#include <cmath>
#include <stdexcept>

namespace mpqkd::pairing {

namespace {

bool within(std::uint64_t first, std::uint64_t second, std::uint64_t l) { return second - first <= l; }

void require_interval(std::uint64_t l) {
  if (l < 1) throw std::invalid_argument("pairing: l must be >= 1");
}

// 1 - (1-p)^l without cancellation for small p.
double close_probability(double p, std::uint64_t l) {
  if (p >= 1.0) return 1.0;
  if (l == kUnbounded) return 1.0;
  return -std::expm1(static_cast<double>(l) * std::log1p(-p));
}

struct GeometricMoments {
  double mean;
  double second;
};

// G ~ Geometric(p) on {1, 2, ...}.
GeometricMoments geometric(double p) { return {1.0 / p, (2.0 - p) / (p * p)}; }

}  // namespace

Box2Pairer::Box2Pairer(std::uint64_t l) : l_(l) { require_interval(l); }

std::optional<RoundPair> Box2Pairer::push(std::uint64_t round) {
  if (round == 0) throw std::invalid_argument("Box2Pairer: rounds are 1-based");
  if (!open_) {
    open_ = round;
    return std::nullopt;
  }
  const std::uint64_t first = open_;
  open_ = 0;
  if (within(first, round, l_)) return RoundPair{first, round};
  return std::nullopt;
}

Box7Pairer::Box7Pairer(std::uint64_t l) : l_(l) { require_interval(l); }

Box7Pairer::Result Box7Pairer::push(std::uint64_t round, Window alice, Window bob) {
  Result out;
  if (alice == Window::Z && bob == Window::Z) {
    out.z = true;
    if (!open_z_) {
      open_z_ = round;
    } else {
      out.pair = RoundPair{*open_z_, round};
      open_z_.reset();
    }
  } else if (alice == Window::X && bob == Window::X) {
    if (!open_x_) {
      open_x_ = round;
    } else if (within(*open_x_, round, l_)) {
      out.pair = RoundPair{*open_x_, round};
      open_x_.reset();
    } else {
      open_x_ = round;
    }
  }
  return out;
}

std::vector<RoundPair> pair_box2(std::span<const bool> effective, std::uint64_t l) {
  Box2Pairer pairer(l);
  std::vector<RoundPair> pairs;
  for (std::size_t i = 0; i < effective.size(); ++i) {
    if (!effective[i]) continue;
    if (auto p = pairer.push(i + 1)) pairs.push_back(*p);
  }
  return pairs;
}

Box7Pairs pair_box7(std::span<const bool> effective, std::span<const Window> alice,
                    std::span<const Window> bob, std::uint64_t l) {
  if (alice.size() != effective.size() || bob.size() != effective.size()) {
    throw std::invalid_argument("pair_box7: sequences must have equal length");
  }
  Box7Pairer pairer(l);
  Box7Pairs out;
  for (std::size_t i = 0; i < effective.size(); ++i) {
    if (!effective[i]) continue;
    const auto r = pairer.push(i + 1, alice[i], bob[i]);
    if (r.pair) (r.z ? out.z : out.x).push_back(*r.pair);
  }
  return out;
}

double pairing_rate(double p, std::uint64_t l) {
  require_interval(l);
  if (p <= 0.0) return 0.0;
  const double q = close_probability(p, l);
  return p * q / (1.0 + q);
}

double pairing_rate_box2(double p, std::uint64_t l) {
  require_interval(l);
  if (p <= 0.0) return 0.0;
  return p * close_probability(p, l) / 2.0;
}

// Renewal-reward CLT: Var(count after n) ~ n Var(R - rho C) / E[C], with
// cycle length C, reward R and rho = E[R] / E[C].

double pair_count_sigma(double p, std::uint64_t l, std::uint64_t n) {
  require_interval(l);
  if (p <= 0.0) return 0.0;
  const double q = close_probability(p, l);
  const auto g = geometric(p);
  const double var_g = g.second - g.mean * g.mean;
  // A cycle: wait for an opening round, then gaps until one is <= l.
  // Failed gaps are l + G (memoryless); the successful gap is G | G <= l.
  double mean_s = g.mean;
  double second_s = g.second;
  double fail_mean = 0.0;
  double fail_var = 0.0;
  if (q < 1.0) {
    fail_mean = static_cast<double>(l) + g.mean;
    fail_var = var_g;
    const double fail_second = fail_var + fail_mean * fail_mean;
    mean_s = (g.mean - (1.0 - q) * fail_mean) / q;
    second_s = (g.second - (1.0 - q) * fail_second) / q;
  }
  const double failures_mean = (1.0 - q) / q;
  const double failures_var = (1.0 - q) / (q * q);
  const double cycle_mean = g.mean + failures_mean * fail_mean + mean_s;
  const double cycle_var = var_g + failures_mean * fail_var + failures_var * fail_mean * fail_mean +
                           (second_s - mean_s * mean_s);
  const double rho = 1.0 / cycle_mean;
  return std::sqrt(static_cast<double>(n) * rho * rho * rho * cycle_var);
}

double pair_count_sigma_box2(double p, std::uint64_t l, std::uint64_t n) {
  require_interval(l);
  if (p <= 0.0) return 0.0;
  const double q = close_probability(p, l);
  const auto g = geometric(p);
  // A cycle is two effective rounds; reward 1 when the second gap is <= l.
  double mean_s = g.mean;
  if (q < 1.0) mean_s = (g.mean - (1.0 - q) * (static_cast<double>(l) + g.mean)) / q;
  const double cycle_mean = 2.0 * g.mean;
  const double rho = q / cycle_mean;
  const double e_rc = q * (g.mean + mean_s);
  const double e_c2 = 2.0 * g.second + 2.0 * g.mean * g.mean;
  const double var = q - 2.0 * rho * e_rc + rho * rho * e_c2;
  return std::sqrt(static_cast<double>(n) * var / cycle_mean);
}

double p_effective(const GainTables& g, double p_z) {
  const double p_x = 1.0 - p_z;
  double zz = 0.0;
  double zx = 0.0;
  double xz = 0.0;
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) zz += g.effective(z_source(a), z_source(b));
    zx += g.effective(z_source(a), Source::Decoy);
    xz += g.effective(Source::Decoy, z_source(a));
  }
  return p_z * p_z / 4.0 * zz + p_z * p_x / 2.0 * (zx + xz) + p_x * p_x * g.effective(Source::Decoy, Source::Decoy);
}

double p_effective_z(const GainTables& g, double p_z) {
  double zz = 0.0;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) zz += g.effective(z_source(a), z_source(b));
  return p_z * p_z / 4.0 * zz;
}

}  // namespace mpqkd::pairing
