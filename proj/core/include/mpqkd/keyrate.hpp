// Sifting predicates, phase-error assembly and the asymptotic key rates.

#pragma once

#include "mpqkd/gains.hpp"

#include <optional>
#include <vector>

namespace mpqkd::keyrate {

constexpr int g1(PairOutcome chi) {
  const int x1 = chi.bit(1), x2 = chi.bit(2), x3 = chi.bit(3), x4 = chi.bit(4);
  return ((1 - x1) & x2 & x3 & (1 - x4)) ^ (x1 & (1 - x2) & (1 - x3) & x4);
}

constexpr int g2(PairOutcome chi) {
  const int x1 = chi.bit(1), x2 = chi.bit(2), x3 = chi.bit(3), x4 = chi.bit(4);
  return ((1 - x1) & x2 & (1 - x3) & x4) ^ (x1 & (1 - x2) & x3 & (1 - x4));
}

/// chi with g1 + g2 = 1: exactly one click in each round.
constexpr bool in_x_set(PairOutcome chi) { return g1(chi) + g2(chi) == 1; }

/// m0, m1 in {+1, -1}.
constexpr bool in_s_set(PairOutcome chi, int m0, int m1) {
  return (g1(chi) == 1 && m0 * m1 == 1) || (g2(chi) == 1 && -m0 * m1 == 1);
}

/// Phase label of an X-basis result: +1 -> 0, -1 -> 1 (phase pi).
constexpr int phase_label(int m) { return (1 - m) / 2; }

std::vector<PairOutcome> x_set();

struct PhaseErrorTriple {
  PairOutcome chi;
  int m0 = 1;
  int m1 = 1;
};
std::vector<PhaseErrorTriple> s_set();

double binary_entropy(double x);

/// sum over S of (1/4) Y^x_{chi | 1, 1, pi D(m0), pi D(m1)} / s11z, clamped to
/// [0, 1/2]. The yields may be exact or upper bounds. nullopt when s11z <= 0.
std::optional<double> phase_error_rate(const PhaseTable& yx11, double s11z);

struct KeyRateInputs {
  double r_p = 0.0;
  double r_z = 0.0;
  double q11z = 0.0;
  double e11x = 0.0;
  double ez = 0.0;
  double f = 1.1;
};

/// r_p r_z {q11z [1 - h(e11x)] - f h(Ez)}, clamped at 0.
double key_rate(const KeyRateInputs& in);

struct KeyRateReport {
  double e11x = 0.0;
  double ez = 0.0;       ///< Z-basis error rate of pairs from the simple rule
  double ez_star = 0.0;  ///< same for the window-aware rule
  double s11z = 0.0;
  double q11z = 0.0;
  double r_p = 0.0;
  double r_z = 0.0;
  double p_eff = 0.0;
  double p_eff_z = 0.0;
  double r_p_z = 0.0;
  double r_z_star = 0.0;
  double q11z_star = 0.0;
  double f = 1.1;
  double r = 0.0;
  double r_star = 0.0;
  bool aborted = false;  ///< s11z vanished, rates set to zero
  int clamped = 0;       ///< decoy bounds pushed back into [0, 1]

  /// R* / R, or 0 when R vanishes.
  double ratio() const { return r > 0.0 ? r_star / r : 0.0; }
};

}  // namespace mpqkd::keyrate
