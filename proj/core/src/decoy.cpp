#include "mpqkd/decoy.hpp"

#include "mpqkd/fock.hpp"
#include "mpqkd/keyrate.hpp"
#include "mpqkd/pairing.hpp"

#include <cmath>
#include <stdexcept>

namespace mpqkd::decoy {

namespace {

double clamp_unit(double v, ClampLog* log, bool lower_bound) {
  if (v >= 0.0 && v <= 1.0) return v;
  if (log) ++(lower_bound ? log->lower : log->upper);
  return v < 0.0 ? 0.0 : 1.0;
}

}  // namespace

double bound_yx11_upper(double q_dd, double q_0d, double q_d0, double q_00, double nu, ClampLog* log) {
  if (!(nu > 0.0)) throw std::invalid_argument("bound_yx11_upper: nu must be > 0");
  const double p0 = fock::poisson_pmf(2.0 * nu, 0);
  const double p1 = fock::poisson_pmf(2.0 * nu, 1);
  const double v = (q_dd - p0 * (q_0d + q_d0) + p0 * p0 * q_00) / (p1 * p1);
  return clamp_unit(v, log, false);
}

double bound_yz_single_lower(double q_nu0, double q_mu0, double q_00, double mu, double nu, ClampLog* log) {
  if (mu == nu) throw std::invalid_argument("degenerate decoy system: mu == nu");
  if (!(mu > 0.0) || !(nu > 0.0)) throw std::invalid_argument("bound_yz_single_lower: intensities must be > 0");
  const double pm0 = fock::poisson_pmf(mu, 0), pm1 = fock::poisson_pmf(mu, 1), pm2 = fock::poisson_pmf(mu, 2);
  const double pn0 = fock::poisson_pmf(nu, 0), pn1 = fock::poisson_pmf(nu, 1), pn2 = fock::poisson_pmf(nu, 2);
  const double den = pm2 * pn1 - pn2 * pm1;
  const double v = (pm2 * q_nu0 - pn2 * q_mu0 - (pm2 * pn0 - pn2 * pm0) * q_00) / den;
  return clamp_unit(v, log, true);
}

double s11z(const ZYield& yield) {
  const auto set = keyrate::x_set();
  double sum = 0.0;
  for (const auto lambda : set) {
    // Round j carries (a_j, b_j) = (lambda1, lambda3), round k (lambda2, lambda4).
    const int aj = lambda.bit(1), ak = lambda.bit(2), bj = lambda.bit(3), bk = lambda.bit(4);
    for (const auto chi : set) sum += 0.25 * yield(aj, bj, chi.round_j()) * yield(ak, bk, chi.round_k());
  }
  return sum;
}

Fractions fractions(double p_eff, const GainTables& g, double s11z_value, double p_z, ClampLog* log) {
  Fractions out;
  if (!(p_eff > 0.0)) return out;
  double sum = 0.0;
  for (const auto lambda : keyrate::x_set()) {
    sum += g.effective(z_source(lambda.bit(1)), z_source(lambda.bit(3))) *
           g.effective(z_source(lambda.bit(2)), z_source(lambda.bit(4)));
  }
  const double pz4 = p_z * p_z * p_z * p_z;
  out.r_z = pz4 / (16.0 * p_eff * p_eff) * sum;
  if (out.r_z > 0.0) {
    const double p1 = fock::poisson_pmf(g.mu, 1);
    out.q11z = clamp_unit(pz4 * p1 * p1 * s11z_value / (4.0 * out.r_z * p_eff * p_eff), log, true);
  }
  return out;
}

DecoyEstimates estimate(const GainTables& g, double p_z, std::uint64_t l) {
  DecoyEstimates e;
  for (int pa = 0; pa < 2; ++pa) {
    for (int pb = 0; pb < 2; ++pb) {
      for (std::uint8_t c = 0; c < 16; ++c) {
        const PairOutcome chi{c};
        e.yx11_upper[pa][pb][c] =
            bound_yx11_upper(g.x(PairSource::DecoyDecoy, pa, pb, chi), g.x(PairSource::VacuumDecoy, pa, pb, chi),
                             g.x(PairSource::DecoyVacuum, pa, pb, chi), g.x(PairSource::VacuumVacuum, pa, pb, chi),
                             g.nu, &e.clamps);
      }
    }
  }
  for (std::uint8_t o = 0; o < 4; ++o) {
    const RoundOutcome out{o};
    const double q00 = g.z(Source::Vacuum, Source::Vacuum, out);
    e.yz10_lower[o] = bound_yz_single_lower(g.z(Source::Decoy, Source::Vacuum, out),
                                            g.z(Source::Signal, Source::Vacuum, out), q00, g.mu, g.nu, &e.clamps);
    e.yz01_lower[o] = bound_yz_single_lower(g.z(Source::Vacuum, Source::Decoy, out),
                                            g.z(Source::Vacuum, Source::Signal, out), q00, g.mu, g.nu, &e.clamps);
  }
  e.s11z_lower = s11z([&](int a, int b, RoundOutcome o) -> double {
    if (a == 1 && b == 1) return 0.0;
    if (a == 1) return e.yz10_lower[o.code];
    if (b == 1) return e.yz01_lower[o.code];
    return g.z(Source::Vacuum, Source::Vacuum, o);
  });
  e.p_eff = pairing::p_effective(g, p_z);
  e.p_eff_z = pairing::p_effective_z(g, p_z);
  e.r_p = pairing::pairing_rate(e.p_eff, l);
  e.r_p_z = pairing::pairing_rate(e.p_eff_z, l);
  const auto plain = fractions(e.p_eff, g, e.s11z_lower, p_z, &e.clamps);
  const auto starred = fractions(e.p_eff_z, g, e.s11z_lower, p_z, &e.clamps);
  e.r_z = plain.r_z;
  e.q11z = plain.q11z;
  e.r_z_star = starred.r_z;
  e.q11z_star = starred.q11z;
  return e;
}

}  // namespace mpqkd::decoy
