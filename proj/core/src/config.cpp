#include "mpqkd/config.hpp"

#include "mpqkd/fock.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace mpqkd {

using nlohmann::json;

std::string_view to_string(Strategy s) { return s == Strategy::Box2 ? "box2" : "box7"; }
std::string_view to_string(Mode m) { return m == Mode::Analytic ? "analytic" : "montecarlo"; }

ConfigError::ConfigError(std::string field, const std::string& message)
    : std::runtime_error(field.empty() ? message : "field '" + field + "': " + message), field_(std::move(field)) {}

channel::ChannelParams ProtocolConfig::channel() const {
  channel::ChannelParams p;
  p.distance_km = distance_km / 2.0;
  p.attenuation_db_per_km = attenuation_db_per_km;
  p.detector_efficiency = detector_efficiency;
  p.dark_count = dark_count;
  p.visibility = visibility;
  return p;
}

void ProtocolConfig::validate() const {
  auto require = [](bool ok, const char* field, const char* message) {
    if (!ok) throw ConfigError(field, message);
  };
  require(std::isfinite(mu) && mu > 0.0, "mu", "must be finite and > 0");
  require(mu != nu, "nu", "degenerate decoy system: mu == nu");
  require(std::isfinite(nu) && nu > 0.0, "nu", "must be finite and > 0");
  require(nu < mu, "nu", "must be smaller than mu");
  require(p_z > 0.0 && p_z < 1.0, "p_z", "must lie in (0, 1)");
  require(l >= 1, "l", "must be >= 1");
  require(std::isfinite(distance_km) && distance_km >= 0.0, "distance_km", "must be finite and >= 0");
  require(std::isfinite(attenuation_db_per_km) && attenuation_db_per_km >= 0.0, "attenuation_db_per_km",
          "must be finite and >= 0");
  require(detector_efficiency > 0.0 && detector_efficiency <= 1.0, "detector_efficiency", "must lie in (0, 1]");
  require(dark_count >= 0.0 && dark_count < 1.0, "dark_count", "must lie in [0, 1)");
  require(visibility >= 0.0 && visibility <= 1.0, "visibility", "must lie in [0, 1]");
  require(phase_slices >= 2 && phase_slices % 2 == 0, "phase_slices", "must be even and >= 2");
  require(mode != Mode::MonteCarlo || rounds >= 1, "rounds", "must be >= 1 in montecarlo mode");
  require(std::isfinite(f) && f >= 1.0, "f", "must be >= 1");
  require(cutoff >= 2 && cutoff <= 60, "cutoff", "must lie in [2, 60]");
  require(fock::poisson_tail(mu, cutoff) < fock::kTruncationThreshold, "cutoff",
          "Poisson tail of mu beyond the cutoff is not negligible");
}

namespace {

double get_double(const json& v, const char* key) {
  if (!v.is_number()) throw ConfigError(key, "expected a number");
  return v.get<double>();
}

std::uint64_t get_count(const json& v, const char* key) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer()) {
    if (v.get<std::int64_t>() < 0) throw ConfigError(key, "must be non-negative");
    return static_cast<std::uint64_t>(v.get<std::int64_t>());
  }
  if (v.is_number_float()) {
    const double d = v.get<double>();
    if (!(d >= 0.0) || d != std::floor(d) || d >= 18446744073709551616.0) {
      throw ConfigError(key, "expected a non-negative integer");
    }
    return static_cast<std::uint64_t>(d);
  }
  throw ConfigError(key, "expected a non-negative integer");
}

int get_int(const json& v, const char* key) {
  const std::uint64_t n = get_count(v, key);
  if (n > static_cast<std::uint64_t>(std::numeric_limits<int>::max())) throw ConfigError(key, "out of range");
  return static_cast<int>(n);
}

std::string get_string(const json& v, const char* key) {
  if (!v.is_string()) throw ConfigError(key, "expected a string");
  return v.get<std::string>();
}

}  // namespace

ProtocolConfig parse_config(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("", std::string("malformed JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("", "configuration must be a JSON object");

  ProtocolConfig c;
  for (const auto& [key, v] : doc.items()) {
    const char* k = key.c_str();
    if (key == "mu") c.mu = get_double(v, k);
    else if (key == "nu") c.nu = get_double(v, k);
    else if (key == "p_z") c.p_z = get_double(v, k);
    else if (key == "l") c.l = get_count(v, k);
    else if (key == "distance_km") c.distance_km = get_double(v, k);
    else if (key == "attenuation_db_per_km") c.attenuation_db_per_km = get_double(v, k);
    else if (key == "detector_efficiency") c.detector_efficiency = get_double(v, k);
    else if (key == "dark_count") c.dark_count = get_double(v, k);
    else if (key == "visibility") c.visibility = get_double(v, k);
    else if (key == "phase_slices") c.phase_slices = get_int(v, k);
    else if (key == "rounds") c.rounds = get_count(v, k);
    else if (key == "f") c.f = get_double(v, k);
    else if (key == "seed") c.seed = get_count(v, k);
    else if (key == "cutoff") c.cutoff = get_int(v, k);
    else if (key == "strategy") {
      const auto s = get_string(v, k);
      if (s == "box2") c.strategy = Strategy::Box2;
      else if (s == "box7") c.strategy = Strategy::Box7;
      else throw ConfigError(key, "expected \"box2\" or \"box7\"");
    } else if (key == "mode") {
      const auto s = get_string(v, k);
      if (s == "analytic") c.mode = Mode::Analytic;
      else if (s == "montecarlo") c.mode = Mode::MonteCarlo;
      else throw ConfigError(key, "expected \"analytic\" or \"montecarlo\"");
    } else {
      throw ConfigError(key, "unknown key");
    }
  }
  c.validate();
  return c;
}

ProtocolConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

std::string to_json(const ProtocolConfig& c) {
  nlohmann::ordered_json doc;
  doc["mu"] = c.mu;
  doc["nu"] = c.nu;
  doc["p_z"] = c.p_z;
  doc["l"] = c.l;
  doc["distance_km"] = c.distance_km;
  doc["attenuation_db_per_km"] = c.attenuation_db_per_km;
  doc["detector_efficiency"] = c.detector_efficiency;
  doc["dark_count"] = c.dark_count;
  doc["visibility"] = c.visibility;
  doc["phase_slices"] = c.phase_slices;
  doc["rounds"] = c.rounds;
  doc["f"] = c.f;
  doc["strategy"] = std::string(to_string(c.strategy));
  doc["mode"] = std::string(to_string(c.mode));
  doc["seed"] = c.seed;
  doc["cutoff"] = c.cutoff;
  return doc.dump(2);
}

}  // namespace mpqkd
