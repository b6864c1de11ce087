#include "mpqkd/cli.hpp"

#include "mpqkd/pipeline.hpp"
#include "mpqkd/protosim.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>
#include <iostream>
#include <numbers>
#include <sstream>

namespace mpqkd::cli {

using nlohmann::ordered_json;

namespace {

keyrate::KeyRateReport scan_point_montecarlo(const ProtocolConfig& c) {
  const auto t = protosim::simulate(c, c.seed);
  return pipeline::estimate_pipeline(t, c);
}

std::vector<ScanRow> scan_distance(const ProtocolConfig& base, double d, std::span<const std::uint64_t> intervals) {
  ProtocolConfig c = base;
  c.distance_km = d;
  std::vector<ScanRow> rows;
  if (c.mode == Mode::Analytic) {
    const auto model = pipeline::analytic_model(c);
    for (const auto l : intervals) {
      c.l = l;
      rows.push_back({d, l, pipeline::analytic_report(model, c)});
    }
  } else {
    for (const auto l : intervals) {
      c.l = l;
      rows.push_back({d, l, scan_point_montecarlo(c)});
    }
  }
  return rows;
}

std::string number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace

std::vector<ScanRow> run_scan(const ProtocolConfig& config, std::span<const double> distances,
                              std::span<const std::uint64_t> intervals, int threads) {
  config.validate();
  for (const auto l : intervals) {
    ProtocolConfig c = config;
    c.l = l;
    c.validate();
  }
  for (const double d : distances) {
    ProtocolConfig c = config;
    c.distance_km = d;
    c.validate();
  }
  std::vector<std::vector<ScanRow>> per_distance(distances.size());
  const std::size_t workers = static_cast<std::size_t>(std::max(1, threads));
  if (workers == 1) {
    for (std::size_t i = 0; i < distances.size(); ++i) per_distance[i] = scan_distance(config, distances[i], intervals);
  } else {
    for (std::size_t start = 0; start < distances.size(); start += workers) {
      std::vector<std::future<std::vector<ScanRow>>> pending;
      for (std::size_t i = start; i < std::min(distances.size(), start + workers); ++i) {
        pending.push_back(std::async(std::launch::async, scan_distance, std::cref(config), distances[i], intervals));
      }
      for (std::size_t i = 0; i < pending.size(); ++i) per_distance[start + i] = pending[i].get();
    }
  }
  std::vector<ScanRow> rows;
  for (auto& block : per_distance) rows.insert(rows.end(), block.begin(), block.end());
  return rows;
}

void write_scan_csv(std::ostream& out, std::span<const ScanRow> rows) {
  out << kCsvHeader << '\n';
  for (const auto& row : rows) {
    const auto& r = row.report;
    out << number(row.distance_km) << ',' << row.l << ',' << number(r.r) << ',' << number(r.r_star) << ','
        << number(r.ratio()) << ',' << number(r.e11x) << ',' << number(r.ez) << ',' << number(r.q11z) << ','
        << number(r.r_p) << ',' << number(r.r_z) << ',' << number(r.s11z) << '\n';
  }
}

SimulationResult run_simulation(const ProtocolConfig& config, int threads) {
  config.validate();
  protosim::SimulationOptions options;
  options.threads = threads;
  SimulationResult out;
  out.snapshot.config = config;
  out.snapshot.seed = config.seed;
  out.snapshot.tallies = protosim::simulate(config, config.seed, options);
  out.report = pipeline::estimate_pipeline(out.snapshot.tallies, config);
  return out;
}

std::string report_json(const keyrate::KeyRateReport& r) {
  ordered_json j;
  j["R"] = r.r;
  j["R_star"] = r.r_star;
  j["ratio"] = r.ratio();
  j["e11x"] = r.e11x;
  j["Ez"] = r.ez;
  j["Ez_star"] = r.ez_star;
  j["s11z"] = r.s11z;
  j["q11z"] = r.q11z;
  j["r_p"] = r.r_p;
  j["r_z"] = r.r_z;
  j["p_eff"] = r.p_eff;
  j["p_eff_z"] = r.p_eff_z;
  j["r_p_z"] = r.r_p_z;
  j["r_z_star"] = r.r_z_star;
  j["q11z_star"] = r.q11z_star;
  j["f"] = r.f;
  j["aborted"] = r.aborted;
  j["clamped"] = r.clamped;
  return j.dump(2);
}

AppendixReport verify_appendix(int cutoff, int grid, std::span<const double> mus, std::span<const double> nus,
                               std::span<const double> deltas, double tolerance) {
  AppendixReport report;
  report.tolerance = tolerance;
  const std::array<int, 2> optical{2, 3};
  for (const double mu : mus) {
    for (const double delta : deltas) {
      const auto numeric = fock::phase_randomize(
          [&](double theta) { return fock::z_pair_parity_one_state(mu, theta + delta, theta, cutoff); }, grid);
      const auto exact = fock::analytic_rho1(mu, delta, cutoff);
      AppendixCase c{"rho1", mu, delta, fock::trace_distance_by_block(numeric, exact, optical)};
      report.max_rho1 = std::max(report.max_rho1, c.distance.upper);
      report.cases.push_back(c);
    }
  }
  for (const double nu : nus) {
    for (const double delta : deltas) {
      const auto numeric = fock::phase_randomize(
          [&](double theta) { return fock::x_pair_state(nu, theta + delta, theta, cutoff); }, grid);
      const auto exact = fock::analytic_sigma1(nu, delta, cutoff);
      AppendixCase c{"sigma1", nu, delta, fock::trace_distance_by_block(numeric, exact, optical)};
      report.max_sigma1 = std::max(report.max_sigma1, c.distance.upper);
      report.cases.push_back(c);
    }
  }
  return report;
}

std::string appendix_json(const AppendixReport& r) {
  ordered_json j;
  j["tolerance"] = r.tolerance;
  j["max_rho1"] = r.max_rho1;
  j["max_sigma1"] = r.max_sigma1;
  j["passed"] = r.passed();
  ordered_json cases = ordered_json::array();
  for (const auto& c : r.cases) {
    ordered_json e;
    e["state"] = c.state;
    e["intensity"] = c.intensity;
    e["delta"] = c.delta;
    e["lower"] = c.distance.lower;
    e["upper"] = c.distance.upper;
    cases.push_back(e);
  }
  j["cases"] = cases;
  return j.dump(2);
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::filesystem::filesystem_error("cannot open for writing", tmp, std::make_error_code(std::errc::io_error));
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      std::error_code ignored;
      std::filesystem::remove(tmp, ignored);
      throw std::filesystem::filesystem_error("write failed", tmp, std::make_error_code(std::errc::io_error));
    }
  }
  std::filesystem::rename(tmp, path);
}

std::vector<double> parse_grid(std::string_view spec) {
  std::vector<double> parts;
  std::string token;
  std::istringstream in{std::string(spec)};
  while (std::getline(in, token, ':')) {
    try {
      std::size_t used = 0;
      parts.push_back(std::stod(token, &used));
      if (used != token.size()) throw std::invalid_argument("trailing characters");
    } catch (const std::exception&) {
      throw std::invalid_argument("grid must be start:stop:step, got '" + std::string(spec) + "'");
    }
  }
  if (parts.size() != 3 || !(parts[2] > 0.0) || parts[1] < parts[0]) {
    throw std::invalid_argument("grid must be start:stop:step with step > 0 and stop >= start");
  }
  std::vector<double> out;
  const auto steps = static_cast<long>(std::floor((parts[1] - parts[0]) / parts[2] + 1e-9));
  for (long i = 0; i <= steps; ++i) out.push_back(parts[0] + static_cast<double>(i) * parts[2]);
  return out;
}

namespace {

int fail(ExitCode code, std::string_view category, const std::string& message) {
  std::cerr << "error[" << category << "]: " << message << '\n';
  return code;
}

ProtocolConfig load_or_default(const std::string& path) {
  return path.empty() ? ProtocolConfig{} : load_config(path);
}

void ensure_dir(const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  if (!std::filesystem::is_directory(dir)) {
    throw std::filesystem::filesystem_error("not a directory", dir, std::make_error_code(std::errc::not_a_directory));
  }
}

}  // namespace

int run(int argc, char** argv) {
  CLI::App app{"Mode-pairing QKD key-rate analyzer and protocol simulator"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = ".";
  std::uint64_t seed = 0;
  int threads = 1;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "Flat JSON configuration file")->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "Output directory");
    sub->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
  };

  auto* scan = app.add_subcommand("scan", "Key rates R and R* over distance and pairing interval");
  common(scan);
  std::vector<double> distances;
  std::string grid;
  std::vector<std::uint64_t> intervals;
  scan->add_option("--distances", distances, "Comma-separated distances in km")->delimiter(',');
  scan->add_option("--grid", grid, "Distance grid start:stop:step in km");
  scan->add_option("--l", intervals, "Comma-separated pairing intervals")->delimiter(',');
  auto* scan_seed = scan->add_option("--seed", seed, "Seed for Monte Carlo mode");

  auto* sim = app.add_subcommand("simulate", "Monte Carlo run: tally snapshot and key-rate report");
  common(sim);
  auto* sim_seed = sim->add_option("--seed", seed, "Random seed");

  auto* appx = app.add_subcommand("verify-appendix", "Check phase-integrated states against their closed forms");
  appx->add_option("--out", out_dir, "Output directory");
  int cutoff = fock::kDefaultCutoff;
  int grid_points = 512;
  double tolerance = 1e-8;
  appx->add_option("--cutoff", cutoff, "Photon-number cutoff")->check(CLI::Range(2, 40));
  appx->add_option("--grid-points", grid_points, "Phase grid size (power of two)");
  appx->add_option("--tolerance", tolerance, "Trace-distance tolerance");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail(kUsageError, "usage", e.what());
  }

  try {
    if (*scan) {
      ProtocolConfig c = load_or_default(config_path);
      if (*scan_seed) c.seed = seed;
      std::vector<double> d = distances;
      if (!grid.empty()) {
        const auto g = parse_grid(grid);
        d.insert(d.end(), g.begin(), g.end());
      }
      if (d.empty()) d.push_back(c.distance_km);
      if (intervals.empty()) intervals.push_back(c.l);
      const auto rows = run_scan(c, d, intervals, threads);
      std::ostringstream csv;
      write_scan_csv(csv, rows);
      ensure_dir(out_dir);
      write_file_atomic(std::filesystem::path(out_dir) / "scan.csv", csv.str());
      std::cout << "scan: " << rows.size() << " rows -> " << (std::filesystem::path(out_dir) / "scan.csv").string()
                << '\n';
      return kOk;
    }
    if (*sim) {
      ProtocolConfig c = load_or_default(config_path);
      if (*sim_seed) c.seed = seed;
      c.mode = Mode::MonteCarlo;
      if (c.rounds == 0) throw ConfigError("rounds", "must be >= 1 in montecarlo mode");
      const auto result = run_simulation(c, threads);
      ensure_dir(out_dir);
      const std::filesystem::path dir(out_dir);
      // Both files are fully rendered before either is written.
      const std::string snapshot = write_snapshot(result.snapshot);
      const std::string report = report_json(result.report);
      write_file_atomic(dir / "tallies.json", snapshot);
      write_file_atomic(dir / "report.json", report);
      std::cout << "simulate: N=" << c.rounds << " seed=" << c.seed << " effective=" << result.snapshot.tallies.effective
                << " pairs=" << result.snapshot.tallies.box2.pairs << " R=" << number(result.report.r)
                << " R_star=" << number(result.report.r_star) << '\n';
      return kOk;
    }
    if (*appx) {
      const std::array<double, 3> mus{0.01, 0.1, 0.429};
      const std::array<double, 3> nus{0.01, 0.038, 0.1};
      const std::array<double, 3> deltas{0.0, std::numbers::pi / 4.0, std::numbers::pi};
      const auto report = verify_appendix(cutoff, grid_points, mus, nus, deltas, tolerance);
      ensure_dir(out_dir);
      write_file_atomic(std::filesystem::path(out_dir) / "appendix.json", appendix_json(report));
      std::cout << "verify-appendix: max rho1 distance " << number(report.max_rho1) << ", max sigma1 distance "
                << number(report.max_sigma1) << (report.passed() ? " (pass)" : " (FAIL)") << '\n';
      return report.passed() ? kOk : fail(kComputeError, "verification", "trace distance above tolerance");
    }
  } catch (const ConfigError& e) {
    return fail(kConfigError, "config", e.what());
  } catch (const SnapshotError& e) {
    return fail(kIoError, "io", e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    return fail(kIoError, "io", e.what());
  } catch (const fock::TruncationError& e) {
    return fail(kComputeError, "compute", e.what());
  } catch (const std::invalid_argument& e) {
    return fail(kUsageError, "usage", e.what());
  } catch (const std::exception& e) {
    return fail(kComputeError, "compute", e.what());
  }
  return kOk;
}

}  // namespace mpqkd::cli
