// Outcome labels and gain tables shared by the channel, decoy and
// simulation modules.

#pragma once

#include <array>
#include <cstdint>

namespace mpqkd {

/// Announcement of one round, (L, R) packed as 2L + R.
struct RoundOutcome {
  std::uint8_t code = 0;

  static constexpr RoundOutcome of(int left, int right) {
    return RoundOutcome{static_cast<std::uint8_t>(2 * left + right)};
  }
  constexpr int left() const { return code >> 1; }
  constexpr int right() const { return code & 1; }
  constexpr bool effective() const { return (left() ^ right()) == 1; }
  constexpr bool operator==(const RoundOutcome&) const = default;
};

/// chi = (L_j, R_j, L_k, R_k) packed most-significant first.
struct PairOutcome {
  std::uint8_t code = 0;

  static constexpr PairOutcome of(int x1, int x2, int x3, int x4) {
    return PairOutcome{static_cast<std::uint8_t>(8 * x1 + 4 * x2 + 2 * x3 + x4)};
  }
  static constexpr PairOutcome of(RoundOutcome j, RoundOutcome k) {
    return PairOutcome{static_cast<std::uint8_t>(4 * j.code + k.code)};
  }
  /// x_i for i in 1..4.
  constexpr int bit(int i) const { return (code >> (4 - i)) & 1; }
  constexpr RoundOutcome round_j() const { return RoundOutcome{static_cast<std::uint8_t>(code >> 2)}; }
  constexpr RoundOutcome round_k() const { return RoundOutcome{static_cast<std::uint8_t>(code & 3)}; }
  constexpr bool operator==(const PairOutcome&) const = default;
};

/// Per-round source intensity: vacuum, signal mu (Z window, bit 1) or decoy nu.
enum class Source : int { Vacuum = 0, Signal = 1, Decoy = 2 };

/// Intensity pair of a virtual X-type pair: (Alice, Bob) in {0, 2nu}.
enum class PairSource : int { DecoyDecoy = 0, VacuumDecoy = 1, DecoyVacuum = 2, VacuumVacuum = 3 };

/// Phase labels 0 -> 0, 1 -> pi.
using PhaseTable = std::array<std::array<std::array<double, 16>, 2>, 2>;

struct GainTables {
  double mu = 0.0;
  double nu = 0.0;
  /// Q^z_{a,b}(L,R), indexed [alice source][bob source][RoundOutcome code].
  std::array<std::array<std::array<double, 4>, 3>, 3> qz{};
  /// Q^x_{src}(chi | phase_a, phase_b), indexed [PairSource][phase_a][phase_b][chi].
  std::array<PhaseTable, 4> qx{};

  double z(Source a, Source b, RoundOutcome o) const {
    return qz[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)][o.code];
  }
  double& z(Source a, Source b, RoundOutcome o) {
    return qz[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)][o.code];
  }
  /// Probability that a round with sources (a, b) is effective.
  double effective(Source a, Source b) const {
    return z(a, b, RoundOutcome::of(1, 0)) + z(a, b, RoundOutcome::of(0, 1));
  }
  double x(PairSource s, int phase_a, int phase_b, PairOutcome chi) const {
    return qx[static_cast<std::size_t>(s)][static_cast<std::size_t>(phase_a)][static_cast<std::size_t>(phase_b)][chi.code];
  }
  double& x(PairSource s, int phase_a, int phase_b, PairOutcome chi) {
    return qx[static_cast<std::size_t>(s)][static_cast<std::size_t>(phase_a)][static_cast<std::size_t>(phase_b)][chi.code];
  }
};

/// Z-basis source of one party in round j or k given its ancilla bit.
constexpr Source z_source(int bit) { return bit ? Source::Signal : Source::Vacuum; }

}  // namespace mpqkd
