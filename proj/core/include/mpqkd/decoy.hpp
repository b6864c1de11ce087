// Decoy-state estimation of single-photon yields from gain tables.

#pragma once

#include "mpqkd/gains.hpp"

#include <array>
#include <cstdint>
#include <functional>

namespace mpqkd::decoy {

/// Counts bounds that had to be pushed back into [0, 1].
struct ClampLog {
  int lower = 0;
  int upper = 0;
  int total() const { return lower + upper; }
};

/// Upper bound on Y^x_{chi | 1, 1, phases} from the four X-pair gains.
double bound_yx11_upper(double q_dd, double q_0d, double q_d0, double q_00, double nu, ClampLog* log = nullptr);

/// Lower bound on Y^z_{o | 1, 0} from Q_{nu,0}, Q_{mu,0} and Q_{0,0} at the
/// same outcome. Call with the roles swapped for Y^z_{o | 0, 1}.
double bound_yz_single_lower(double q_nu0, double q_mu0, double q_00, double mu, double nu,
                             ClampLog* log = nullptr);

/// Y^z_{o | a, b} for photon numbers a, b in {0, 1}.
using ZYield = std::function<double(int a, int b, RoundOutcome o)>;

/// sum_{chi, lambda in X} (1/4) Y^z(round j) Y^z(round k), with lambda read
/// as the ancilla record (a_j, a_k, b_j, b_k).
double s11z(const ZYield& yield);

struct Fractions {
  double r_z = 0.0;
  double q11z = 0.0;
};

/// r_z and q11z for a given effective-round probability; p_eff gives the
/// simple-rule values, p_eff_z the window-aware ones.
Fractions fractions(double p_eff, const GainTables& g, double s11z, double p_z, ClampLog* log = nullptr);

struct DecoyEstimates {
  PhaseTable yx11_upper{};
  std::array<double, 4> yz10_lower{};  ///< by RoundOutcome code
  std::array<double, 4> yz01_lower{};
  double s11z_lower = 0.0;
  double p_eff = 0.0;
  double p_eff_z = 0.0;
  double r_p = 0.0;
  double r_p_z = 0.0;
  double r_z = 0.0;
  double r_z_star = 0.0;
  double q11z = 0.0;
  double q11z_star = 0.0;
  ClampLog clamps;
};

DecoyEstimates estimate(const GainTables& g, double p_z, std::uint64_t l);

}  // namespace mpqkd::decoy
