#include "mpqkd/keyrate.hpp"

#include <algorithm>
#include <cmath>

namespace mpqkd::keyrate {

std::vector<PairOutcome> x_set() {
  std::vector<PairOutcome> out;
  for (std::uint8_t c = 0; c < 16; ++c)
    if (in_x_set(PairOutcome{c})) out.push_back(PairOutcome{c});
  return out;
}

std::vector<PhaseErrorTriple> s_set() {
  std::vector<PhaseErrorTriple> out;
  for (std::uint8_t c = 0; c < 16; ++c)
    for (int m0 : {1, -1})
      for (int m1 : {1, -1})
        if (in_s_set(PairOutcome{c}, m0, m1)) out.push_back({PairOutcome{c}, m0, m1});
  return out;
}

double binary_entropy(double x) {
  if (x <= 0.0 || x >= 1.0) return 0.0;
  return -x * std::log2(x) - (1.0 - x) * std::log2(1.0 - x);
}

std::optional<double> phase_error_rate(const PhaseTable& yx11, double s11z) {
  if (!(s11z > 0.0)) return std::nullopt;
  double sum = 0.0;
  for (const auto& t : s_set()) {
    sum += 0.25 * yx11[static_cast<std::size_t>(phase_label(t.m0))][static_cast<std::size_t>(phase_label(t.m1))][t.chi.code];
  }
  return std::clamp(sum / s11z, 0.0, 0.5);
}

double key_rate(const KeyRateInputs& in) {
  const double bracket = in.q11z * (1.0 - binary_entropy(in.e11x)) - in.f * binary_entropy(in.ez);
  return std::max(0.0, in.r_p * in.r_z * bracket);
}

}  // namespace mpqkd::keyrate
