#include "mpqkd/pipeline.hpp"

#include "mpqkd/pairing.hpp"

namespace mpqkd::pipeline {

AnalyticModel analytic_model(const ProtocolConfig& config) {
  config.validate();
  auto povm = channel::build_round_povm(config.channel(), config.cutoff);
  auto gains = channel::gains_q(povm, config.mu, config.nu);
  auto truth = channel::true_yields(povm);
  return AnalyticModel{std::move(povm), gains, truth};
}

double analytic_z_error(const GainTables& g) {
  double all = 0.0;
  double wrong = 0.0;
  for (const auto lambda : keyrate::x_set()) {
    const double w = g.effective(z_source(lambda.bit(1)), z_source(lambda.bit(3))) *
                     g.effective(z_source(lambda.bit(2)), z_source(lambda.bit(4)));
    all += w;
    if (lambda.bit(1) == lambda.bit(3)) wrong += w;
  }
  return all > 0.0 ? wrong / all : 0.0;
}

namespace {

void finish(keyrate::KeyRateReport& r, const ProtocolConfig& config, bool starred) {
  r.f = config.f;
  r.r = keyrate::key_rate({r.r_p, r.r_z, r.q11z, r.e11x, r.ez, r.f});
  r.r_star = starred ? keyrate::key_rate({r.r_p_z, r.r_z_star, r.q11z_star, r.e11x, r.ez_star, r.f}) : 0.0;
}

keyrate::KeyRateReport from_estimates(const decoy::DecoyEstimates& e, double ez, double ez_star,
                                      const ProtocolConfig& config, bool starred) {
  keyrate::KeyRateReport r;
  r.s11z = e.s11z_lower;
  r.q11z = e.q11z;
  r.r_p = e.r_p;
  r.r_z = e.r_z;
  r.p_eff = e.p_eff;
  r.p_eff_z = e.p_eff_z;
  r.r_p_z = e.r_p_z;
  r.r_z_star = e.r_z_star;
  r.q11z_star = e.q11z_star;
  r.ez = ez;
  r.ez_star = ez_star;
  r.clamped = e.clamps.total();
  const auto e11x = keyrate::phase_error_rate(e.yx11_upper, e.s11z_lower);
  if (!e11x) {
    r.aborted = true;
    r.e11x = 0.5;
    r.f = config.f;
    return r;
  }
  r.e11x = *e11x;
  finish(r, config, starred);
  return r;
}

}  // namespace

keyrate::KeyRateReport estimate_pipeline(const GainTables& g, double ez, double ez_star,
                                         const ProtocolConfig& config) {
  return from_estimates(decoy::estimate(g, config.p_z, config.l), ez, ez_star, config, true);
}

keyrate::KeyRateReport estimate_pipeline(const protosim::Tallies& t, const ProtocolConfig& config) {
  const GainTables g = protosim::empirical_gains(t, config.mu, config.nu);
  auto rate = [](const protosim::PairTally& p) {
    return p.z_basis > 0 ? static_cast<double>(p.z_errors) / static_cast<double>(p.z_basis) : 0.0;
  };
  const double ez = rate(t.box2);
  const double ez_star = t.has_box7 ? rate(t.box7) : ez;
  return from_estimates(decoy::estimate(g, config.p_z, config.l), ez, ez_star, config, t.has_box7);
}

keyrate::KeyRateReport analytic_report(const AnalyticModel& model, const ProtocolConfig& config) {
  const double ez = analytic_z_error(model.gains);
  return estimate_pipeline(model.gains, ez, ez, config);
}

double true_s11z(const channel::TrueYields& truth) {
  return decoy::s11z([&](int a, int b, RoundOutcome o) { return truth.z(a, b, o); });
}

keyrate::KeyRateReport oracle_report(const AnalyticModel& model, const ProtocolConfig& config) {
  const GainTables& g = model.gains;
  const double s11z = true_s11z(model.truth);
  keyrate::KeyRateReport r;
  r.s11z = s11z;
  r.p_eff = pairing::p_effective(g, config.p_z);
  r.p_eff_z = pairing::p_effective_z(g, config.p_z);
  r.r_p = pairing::pairing_rate(r.p_eff, config.l);
  r.r_p_z = pairing::pairing_rate(r.p_eff_z, config.l);
  const auto plain = decoy::fractions(r.p_eff, g, s11z, config.p_z);
  const auto starred = decoy::fractions(r.p_eff_z, g, s11z, config.p_z);
  r.r_z = plain.r_z;
  r.q11z = plain.q11z;
  r.r_z_star = starred.r_z;
  r.q11z_star = starred.q11z;
  r.ez = r.ez_star = analytic_z_error(g);
  const auto e11x = keyrate::phase_error_rate(model.truth.yx11, s11z);
  if (!e11x) {
    r.aborted = true;
    r.e11x = 0.5;
    r.f = config.f;
    return r;
  }
  r.e11x = *e11x;
  finish(r, config, true);
  return r;
}

}  // namespace mpqkd::pipeline
