// Parameter estimation and key rate, from analytic gains or from tallies.

#pragma once

#include "mpqkd/channel.hpp"
#include "mpqkd/config.hpp"
#include "mpqkd/decoy.hpp"
#include "mpqkd/keyrate.hpp"
#include "mpqkd/protosim.hpp"

namespace mpqkd::pipeline {

/// Fock-space description of the configured channel.
struct AnalyticModel {
  channel::RoundPovm povm;
  GainTables gains;
  channel::TrueYields truth;
};

AnalyticModel analytic_model(const ProtocolConfig& config);

/// Z-basis error rate implied by the Z gains (one photon source per round).
double analytic_z_error(const GainTables& g);

/// Decoy bounds to key rates. ez and ez_star are the measured Z-basis error
/// rates of the two pairing rules.
keyrate::KeyRateReport estimate_pipeline(const GainTables& g, double ez, double ez_star,
                                         const ProtocolConfig& config);
keyrate::KeyRateReport estimate_pipeline(const protosim::Tallies& t, const ProtocolConfig& config);
keyrate::KeyRateReport analytic_report(const AnalyticModel& model, const ProtocolConfig& config);

/// Same chain with the exact single-photon yields in place of the bounds.
keyrate::KeyRateReport oracle_report(const AnalyticModel& model, const ProtocolConfig& config);

/// Exact s11z of the channel.
double true_s11z(const channel::TrueYields& truth);

}  // namespace mpqkd::pipeline
