// Event-level Monte Carlo of the prepare-and-measure protocol.
//
// Each round both parties pick a window, a bit and a phase slice; Charlie's
// announcement is drawn from the closed-form coherent gains. Effective
// rounds are paired on the fly, sifted and key-mapped. Everything persisted
// is an integer count.

#pragma once

#include "mpqkd/config.hpp"
#include "mpqkd/gains.hpp"
#include "mpqkd/pairing.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace mpqkd::protosim {

using pairing::Window;

struct Party {
  Window window = Window::Z;
  std::uint8_t bit = 0;
  std::uint8_t slice = 0;  ///< theta = 2 pi slice / D
  bool operator==(const Party&) const = default;
};

struct RoundRecord {
  std::uint64_t index = 0;  ///< 1-based
  Party alice;
  Party bob;
  RoundOutcome outcome;
  bool effective() const { return outcome.effective(); }
  bool operator==(const RoundRecord&) const = default;
};

double intensity(const Party& p, double mu, double nu);
/// Emitted phase slice: theta, plus pi for an X-window bit 1.
int emitted_slice(const Party& p, int slices);

/// Per-party histogram state: 0 = Z bit 0 (vacuum), 1 = Z bit 1 (mu),
/// 2 + 2 slice + bit = X window.
int party_state(const Party& p);
int party_states(int slices);

enum class PairClass : std::uint8_t { Z, X, Mismatch };

struct PairRecord {
  std::uint64_t j = 0;
  std::uint64_t k = 0;
  PairClass cls = PairClass::Mismatch;
  int parity_a = 0;  ///< a_j xor a_k
  int parity_b = 0;
  PairOutcome chi;
  int delta_a = 0;  ///< (theta_j - theta_k) mod D, in slices
  int delta_b = 0;
  bool z_basis = false;  ///< Z pair with both parities one
  bool x_kept = false;   ///< X pair with delta_a = delta_b mod pi
  std::uint8_t alpha = 0;
  std::uint8_t beta = 0;  ///< after any flips
  bool flipped = false;
  bool keyed() const { return z_basis || x_kept; }
  bool error() const { return keyed() && alpha != beta; }
};

/// Sifting and key mapping of one pair.
PairRecord make_pair_record(const RoundRecord& j, const RoundRecord& k, int slices);

struct PairTally {
  std::uint64_t pairs = 0;
  std::uint64_t z_pairs = 0;
  std::uint64_t x_pairs = 0;
  std::uint64_t mismatch_pairs = 0;
  std::uint64_t z_basis = 0;
  std::uint64_t z_errors = 0;
  std::uint64_t x_kept = 0;
  std::uint64_t x_errors = 0;

  void add(const PairRecord& r);
  PairTally& operator+=(const PairTally& o);
  bool operator==(const PairTally&) const = default;
};

struct Tallies {
  std::uint64_t rounds = 0;
  int slices = 16;
  /// [alice state][bob state][outcome code], flattened.
  std::vector<std::uint64_t> round_counts;
  std::uint64_t effective = 0;
  std::uint64_t effective_zz = 0;
  PairTally box2;
  PairTally box7;
  bool has_box7 = false;

  explicit Tallies(int slices = 16);
  std::size_t bin(int alice_state, int bob_state, RoundOutcome o) const;
  std::uint64_t count(int alice_state, int bob_state, RoundOutcome o) const {
    return round_counts[bin(alice_state, bob_state, o)];
  }
  /// Pure addition of counts; pair tallies add as well, which is exact for
  /// runs whose pairing streams were independent.
  Tallies& operator+=(const Tallies& o);
  bool operator==(const Tallies&) const = default;
};

using PairObserver = std::function<void(const PairRecord&, bool box7)>;
using RoundObserver = std::function<void(const RoundRecord&)>;

/// Streams rounds in index order into tallies: histogram, pairing, sifting.
class TallyBuilder {
 public:
  explicit TallyBuilder(const ProtocolConfig& config);

  void add(const RoundRecord& round);
  void set_pair_observer(PairObserver observer) { pair_observer_ = std::move(observer); }
  const Tallies& tallies() const { return tallies_; }

  // Fast path used by simulate: counts merged in bulk, effective rounds fed
  // in order.
  void merge_counts(std::span<const std::uint64_t> counts, std::uint64_t rounds);
  void add_effective(const RoundRecord& round);

 private:
  int slices_;
  bool box7_;
  pairing::Box2Pairer box2_;
  pairing::Box7Pairer box7_pairer_;
  RoundRecord open2_{};
  RoundRecord open7x_{};
  RoundRecord open7z_{};
  Tallies tallies_;
  PairObserver pair_observer_;
};

struct SimulationOptions {
  int threads = 1;
  std::uint64_t batch_rounds = 1u << 20;
  RoundObserver round_observer;  ///< forces single-threaded generation
};

/// Deterministic in (config, seed); independent of the thread count.
Tallies simulate(const ProtocolConfig& config, std::uint64_t seed, const SimulationOptions& options = {});

/// Probability of every histogram bin under the closed-form channel.
std::vector<double> round_bin_probabilities(const ProtocolConfig& config);

/// Gain tables from histogram weights (counts or probabilities). Virtual
/// X-type pairs are all ordered pairs of distinct rounds; with
/// `distinct_rounds` false the weights are treated as probabilities and the
/// self-pair correction is skipped.
GainTables gains_from_bins(std::span<const double> bins, int slices, double mu, double nu, bool distinct_rounds);
GainTables empirical_gains(const Tallies& t, double mu, double nu);

/// Sampling standard deviation of every empirical gain entry after n rounds,
/// by the delta method on the bin probabilities; X-type entries add the
/// leading pair-counting term.
GainTables gain_sigmas(std::span<const double> probabilities, int slices, std::uint64_t n);

}  // namespace mpqkd::protosim
