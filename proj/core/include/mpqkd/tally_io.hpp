// Versioned JSON snapshot of Monte Carlo tallies.

#pragma once

#include "mpqkd/config.hpp"
#include "mpqkd/protosim.hpp"

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace mpqkd {

inline constexpr std::string_view kTallySchema = "mpqkd.tallies";
inline constexpr int kTallyVersion = 1;

struct TallySnapshot {
  ProtocolConfig config;
  std::uint64_t seed = 0;
  protosim::Tallies tallies;
  bool operator==(const TallySnapshot&) const = default;
};

class SnapshotError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string write_snapshot(const TallySnapshot& s);
TallySnapshot read_snapshot(std::string_view text);

}  // namespace mpqkd
