// Command-line front end: scans, simulations and the Fock-space cross-check.

#pragma once

#include "mpqkd/config.hpp"
#include "mpqkd/fock.hpp"
#include "mpqkd/keyrate.hpp"
#include "mpqkd/tally_io.hpp"

#include <cstdint>
#include <filesystem>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace mpqkd::cli {

inline constexpr std::string_view kCsvHeader = "distance_km,l,R,R_star,ratio,e11x,Ez,q11z,r_p,r_z,s11z";

/// Exit codes; the matching category is printed as "error[<category>]: ...".
enum ExitCode : int {
  kOk = 0,
  kUsageError = 2,
  kConfigError = 3,
  kIoError = 4,
  kComputeError = 5,
};

struct ScanRow {
  double distance_km = 0.0;
  std::uint64_t l = 0;
  keyrate::KeyRateReport report;
};

/// Rows ordered by (distance, l) grid index. Analytic unless the config asks
/// for Monte Carlo.
std::vector<ScanRow> run_scan(const ProtocolConfig& config, std::span<const double> distances,
                              std::span<const std::uint64_t> intervals, int threads = 1);
void write_scan_csv(std::ostream& out, std::span<const ScanRow> rows);

struct SimulationResult {
  TallySnapshot snapshot;
  keyrate::KeyRateReport report;
};
SimulationResult run_simulation(const ProtocolConfig& config, int threads = 1);

std::string report_json(const keyrate::KeyRateReport& r);

struct AppendixCase {
  std::string state;  ///< "rho1" or "sigma1"
  double intensity = 0.0;
  double delta = 0.0;
  fock::TraceDistanceBound distance;
};

struct AppendixReport {
  std::vector<AppendixCase> cases;
  double tolerance = 1e-8;
  double max_rho1 = 0.0;
  double max_sigma1 = 0.0;
  bool passed() const { return max_rho1 < tolerance && max_sigma1 < tolerance; }
};

/// Phase-integrated extended states against their closed forms; the
/// reported distance is the upper end of the block bracket.
AppendixReport verify_appendix(int cutoff, int grid, std::span<const double> mus, std::span<const double> nus,
                               std::span<const double> deltas, double tolerance = 1e-8);
std::string appendix_json(const AppendixReport& r);

/// Writes via a temporary sibling and renames, so readers never see a
/// partial file.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

/// "start:stop:step" inclusive of stop (up to rounding).
std::vector<double> parse_grid(std::string_view spec);

int run(int argc, char** argv);

}  // namespace mpqkd::cli
