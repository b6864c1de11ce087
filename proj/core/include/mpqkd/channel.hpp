// Charlie's station: per-arm loss, 50/50 interference with finite visibility,
// and two threshold detectors with dark counts, expressed as a four-outcome
// POVM on (Alice's mode) x (Bob's mode).
//
// Visibility V is a mode overlap: detector L sees the quadratic form
// eta/2 (|a|^2 + |b|^2) + eta V Re(a b*) and detector R the same with -V.
// Both no-click operators are then diagonal in the interferometer output
// basis c = (a+b)/sqrt2, d = (a-b)/sqrt2:
//   no click at L : (1-pd) (1 - eta(1+V)/2)^{n_c} (1 - eta(1-V)/2)^{n_d}
//   no click at R : (1-pd) (1 - eta(1-V)/2)^{n_c} (1 - eta(1+V)/2)^{n_d}
//   neither       : (1-pd)^2 (1 - eta)^{n_c + n_d}
// and the two-click element follows from completeness.

#pragma once

#include "mpqkd/fock.hpp"
#include "mpqkd/gains.hpp"

#include <Eigen/Dense>

#include <array>

namespace mpqkd::channel {

struct ChannelParams {
  double distance_km = 0.0;  ///< fiber length of one arm
  double attenuation_db_per_km = 0.2;
  double detector_efficiency = 0.7;
  double dark_count = 1e-8;  ///< per detector per round
  double visibility = 0.99;

  /// eta_d * 10^{-alpha d / 10}
  double transmittance() const;
  void validate() const;
};

class RoundPovm {
 public:
  RoundPovm(int cutoff, std::array<Eigen::MatrixXd, 4> elements);

  int cutoff() const { return cutoff_; }
  /// Input basis index of |a photons, b photons>.
  Eigen::Index index(int photons_a, int photons_b) const { return photons_a * (cutoff_ + 1) + photons_b; }
  const Eigen::MatrixXd& element(RoundOutcome o) const { return elements_[o.code]; }
  double operator()(RoundOutcome o, int a, int b, int a2, int b2) const {
    return elements_[o.code](index(a, b), index(a2, b2));
  }

  /// <psi| M_o |psi> for a two-mode state (Alice, Bob).
  double probability(RoundOutcome o, const fock::FockState& input) const;
  /// max |sum_o M_o - I|.
  double completeness_error() const;
  /// Smallest eigenvalue over the four elements.
  double min_eigenvalue() const;

 private:
  int cutoff_;
  std::array<Eigen::MatrixXd, 4> elements_;
};

RoundPovm build_round_povm(const ChannelParams& params, int cutoff = fock::kDefaultCutoff);

/// Y^z_{chi1,chi2 | a, b} = <a b| M |a b>.
double yield_z(const RoundPovm& povm, int photons_a, int photons_b, RoundOutcome o);

/// Y^x_{chi | m, n, delta_a, delta_b}: probability of chi for
/// |gamma_{m,delta_a}>_{A_j A_k} |gamma_{n,delta_b}>_{B_j B_k}.
double yield_x_pair(const RoundPovm& povm, int m, int n, double delta_a, double delta_b, PairOutcome chi);

/// <psi| M_{chi1 chi2} (x) M_{chi3 chi4} |psi> for a four-mode state in
/// mode order (A_j, B_j, A_k, B_k).
double pair_probability(const RoundPovm& povm, PairOutcome chi, const fock::FockState& state);

struct OutcomeDistribution {
  std::array<double, 4> p{};
  double operator()(RoundOutcome o) const { return p[o.code]; }
  double left_click() const { return p[2] + p[3]; }
  double right_click() const { return p[1] + p[3]; }
};

/// Closed form for coherent inputs with intensities mu_a, mu_b and relative
/// phase phase_a - phase_b.
OutcomeDistribution gain_coherent(const ChannelParams& params, double mu_a, double mu_b, double phase_diff);

/// Q^z and Q^x tables by Poisson-averaging Fock yields.
GainTables gains_q(const RoundPovm& povm, double mu, double nu);

/// Exact single-photon quantities of the channel, for oracle comparisons.
struct TrueYields {
  /// Y^z_{o | a, b} for a, b in {0, 1}.
  std::array<std::array<std::array<double, 4>, 2>, 2> yz{};
  /// Y^x_{chi | 1, 1, phase_a pi, phase_b pi}.
  PhaseTable yx11{};
  double z(int a, int b, RoundOutcome o) const {
    return yz[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)][o.code];
  }
};

TrueYields true_yields(const RoundPovm& povm);

}  // namespace mpqkd::channel
