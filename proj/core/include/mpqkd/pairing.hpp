// Pairing of effective rounds into (j, k) pairs.
//
// Round indices are 1-based throughout. A pairing interval l bounds k - j;
// l = kUnbounded never discards.

#pragma once

#include "mpqkd/gains.hpp"

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <vector>

namespace mpqkd::pairing {

inline constexpr std::uint64_t kUnbounded = std::numeric_limits<std::uint64_t>::max();

struct RoundPair {
  std::uint64_t first = 0;
  std::uint64_t second = 0;
  bool operator==(const RoundPair&) const = default;
};

enum class Window : std::uint8_t { Z = 0, X = 1 };

/// Simple sequential rule: the first effective round opens a pair and the
/// next effective round closes it if it lies within l; otherwise both are
/// discarded and the search restarts after the late round.
class Box2Pairer {
 public:
  explicit Box2Pairer(std::uint64_t l);
  /// Feed the next effective round; returns a pair when one closes.
  std::optional<RoundPair> push(std::uint64_t round);
  std::optional<std::uint64_t> open() const {
    return open_ ? std::optional<std::uint64_t>(open_) : std::nullopt;
  }

 private:
  std::uint64_t l_;
  std::uint64_t open_ = 0;  ///< 0 when no round is open
};

/// Window-aware rule. Effective Z-Z rounds are paired back to back with no
/// interval limit. Effective X-X rounds are paired within l, and a round
/// arriving too late replaces the open one instead of being discarded.
/// Mixed-window rounds are skipped.
class Box7Pairer {
 public:
  explicit Box7Pairer(std::uint64_t l);
  struct Result {
    std::optional<RoundPair> pair;
    bool z = false;  ///< pair came from the Z-Z stream
  };
  Result push(std::uint64_t round, Window alice, Window bob);
  std::optional<std::uint64_t> open_x() const { return open_x_; }
  std::optional<std::uint64_t> open_z() const { return open_z_; }

 private:
  std::uint64_t l_;
  std::optional<std::uint64_t> open_x_;
  std::optional<std::uint64_t> open_z_;
};

/// Applies Box2Pairer to a click record (true = effective).
std::vector<RoundPair> pair_box2(std::span<const bool> effective, std::uint64_t l);

struct Box7Pairs {
  std::vector<RoundPair> x;
  std::vector<RoundPair> z;
};
Box7Pairs pair_box7(std::span<const bool> effective, std::span<const Window> alice,
                    std::span<const Window> bob, std::uint64_t l);

/// Pairs per round for effective-round probability p under the replacing
/// interval rule: p q / (1 + q), q = 1 - (1-p)^l.
double pairing_rate(double p, std::uint64_t l);
/// Pairs per round for Box2Pairer: p q / 2.
double pairing_rate_box2(double p, std::uint64_t l);

/// Standard deviation of the pair count after n rounds, from the renewal
/// reward variance of each rule.
double pair_count_sigma(double p, std::uint64_t l, std::uint64_t n);
double pair_count_sigma_box2(double p, std::uint64_t l, std::uint64_t n);

/// Probability that a round is effective, averaged over windows and bits.
double p_effective(const GainTables& g, double p_z);
/// Probability that a round is effective with both parties in Z windows.
double p_effective_z(const GainTables& g, double p_z);

}  // namespace mpqkd::pairing
