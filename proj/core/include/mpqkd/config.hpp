// Protocol configuration: one flat record shared by the simulator, the
// analytic pipeline and the command-line front end.

#pragma once

#include "mpqkd/channel.hpp"

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>

namespace mpqkd {

enum class Strategy { Box2, Box7 };
enum class Mode { Analytic, MonteCarlo };

std::string_view to_string(Strategy s);
std::string_view to_string(Mode m);

/// Invalid or unparsable configuration; `field` names the offending key
/// (empty when the document itself is malformed).
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& message);
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

struct ProtocolConfig {
  double mu = 0.429;
  double nu = 0.038;
  double p_z = 0.5;
  std::uint64_t l = 2000;
  double distance_km = 0.0;  ///< Alice to Bob; Charlie sits in the middle
  double attenuation_db_per_km = 0.2;
  double detector_efficiency = 0.7;
  double dark_count = 1e-8;
  double visibility = 0.99;
  int phase_slices = 16;
  std::uint64_t rounds = 0;
  double f = 1.1;
  Strategy strategy = Strategy::Box7;
  Mode mode = Mode::Analytic;
  std::uint64_t seed = 1;
  int cutoff = 20;

  /// Per-arm channel, distance_km / 2 each.
  channel::ChannelParams channel() const;

  /// Throws ConfigError naming the first bad field.
  void validate() const;

  bool operator==(const ProtocolConfig&) const = default;
};

/// Flat JSON object; keys absent from the document keep their defaults,
/// unknown keys are rejected. The result is validated.
ProtocolConfig parse_config(std::string_view text);
ProtocolConfig load_config(const std::filesystem::path& path);

/// Every field, in declaration order; parse_config(to_json(c)) == c.
std::string to_json(const ProtocolConfig& config);

}  // namespace mpqkd
