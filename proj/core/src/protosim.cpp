#include "mpqkd/protosim.hpp"

#include "mpqkd/channel.hpp"
#include "mpqkd/keyrate.hpp"

#include <array>
#include <cmath>
#include <future>
#include <numbers>
#include <random>
#include <stdexcept>

namespace mpqkd::protosim {

double intensity(const Party& p, double mu, double nu) {
  if (p.window == Window::X) return nu;
  return p.bit ? mu : 0.0;
}

int emitted_slice(const Party& p, int slices) {
  const int shift = p.window == Window::X && p.bit ? slices / 2 : 0;
  return (p.slice + shift) % slices;
}

int party_state(const Party& p) {
  if (p.window == Window::Z) return p.bit;
  return 2 + 2 * p.slice + p.bit;
}

int party_states(int slices) { return 2 + 2 * slices; }

namespace {

int mod(int a, int m) { return ((a % m) + m) % m; }

}  // namespace

PairRecord make_pair_record(const RoundRecord& j, const RoundRecord& k, int slices) {
  PairRecord r;
  r.j = j.index;
  r.k = k.index;
  const bool all_z = j.alice.window == Window::Z && k.alice.window == Window::Z && j.bob.window == Window::Z &&
                     k.bob.window == Window::Z;
  const bool all_x = j.alice.window == Window::X && k.alice.window == Window::X && j.bob.window == Window::X &&
                     k.bob.window == Window::X;
  r.cls = all_z ? PairClass::Z : all_x ? PairClass::X : PairClass::Mismatch;
  const int aj = j.alice.bit, ak = k.alice.bit, bj = j.bob.bit, bk = k.bob.bit;
  r.parity_a = aj ^ ak;
  r.parity_b = bj ^ bk;
  r.chi = PairOutcome::of(j.outcome, k.outcome);
  r.delta_a = mod(j.alice.slice - k.alice.slice, slices);
  r.delta_b = mod(j.bob.slice - k.bob.slice, slices);
  if (r.cls == PairClass::Z) {
    r.z_basis = r.parity_a == 1 && r.parity_b == 1;
    r.alpha = static_cast<std::uint8_t>(aj & (1 - ak));
    r.beta = static_cast<std::uint8_t>((1 - bj) & bk);
  } else if (r.cls == PairClass::X) {
    const int diff = mod(r.delta_a - r.delta_b, slices);
    r.x_kept = diff % (slices / 2) == 0;
    r.alpha = static_cast<std::uint8_t>(1 ^ aj ^ ak);
    r.flipped = (diff == slices / 2) != (keyrate::g1(r.chi) == 1);
    r.beta = static_cast<std::uint8_t>((1 ^ bj ^ bk) ^ (r.flipped ? 1 : 0));
  }
  return r;
}

void PairTally::add(const PairRecord& r) {
  ++pairs;
  switch (r.cls) {
    case PairClass::Z: ++z_pairs; break;
    case PairClass::X: ++x_pairs; break;
    case PairClass::Mismatch: ++mismatch_pairs; break;
  }
  if (r.z_basis) {
    ++z_basis;
    if (r.error()) ++z_errors;
  }
  if (r.x_kept) {
    ++x_kept;
    if (r.error()) ++x_errors;
  }
}

PairTally& PairTally::operator+=(const PairTally& o) {
  pairs += o.pairs;
  z_pairs += o.z_pairs;
  x_pairs += o.x_pairs;
  mismatch_pairs += o.mismatch_pairs;
  z_basis += o.z_basis;
  z_errors += o.z_errors;
  x_kept += o.x_kept;
  x_errors += o.x_errors;
  return *this;
}

Tallies::Tallies(int slices_)
    : slices(slices_),
      round_counts(static_cast<std::size_t>(party_states(slices_) * party_states(slices_) * 4), 0) {}

std::size_t Tallies::bin(int alice_state, int bob_state, RoundOutcome o) const {
  return static_cast<std::size_t>((alice_state * party_states(slices) + bob_state) * 4 + o.code);
}

Tallies& Tallies::operator+=(const Tallies& o) {
  if (o.slices != slices) throw std::invalid_argument("Tallies: cannot merge different phase-slice counts");
  rounds += o.rounds;
  for (std::size_t i = 0; i < round_counts.size(); ++i) round_counts[i] += o.round_counts[i];
  effective += o.effective;
  effective_zz += o.effective_zz;
  box2 += o.box2;
  box7 += o.box7;
  has_box7 = has_box7 || o.has_box7;
  return *this;
}

TallyBuilder::TallyBuilder(const ProtocolConfig& config)
    : slices_(config.phase_slices),
      box7_(config.strategy == Strategy::Box7),
      box2_(config.l),
      box7_pairer_(config.l),
      tallies_(config.phase_slices) {
  tallies_.has_box7 = box7_;
}

void TallyBuilder::add(const RoundRecord& round) {
  ++tallies_.rounds;
  ++tallies_.round_counts[tallies_.bin(party_state(round.alice), party_state(round.bob), round.outcome)];
  if (round.effective()) add_effective(round);
}

void TallyBuilder::merge_counts(std::span<const std::uint64_t> counts, std::uint64_t rounds) {
  if (counts.size() != tallies_.round_counts.size()) throw std::invalid_argument("merge_counts: size mismatch");
  for (std::size_t i = 0; i < counts.size(); ++i) tallies_.round_counts[i] += counts[i];
  tallies_.rounds += rounds;
}

void TallyBuilder::add_effective(const RoundRecord& round) {
  ++tallies_.effective;
  if (round.alice.window == Window::Z && round.bob.window == Window::Z) ++tallies_.effective_zz;

  if (auto p = box2_.push(round.index)) {
    const PairRecord r = make_pair_record(open2_, round, slices_);
    tallies_.box2.add(r);
    if (pair_observer_) pair_observer_(r, false);
  }
  if (box2_.open() == round.index) open2_ = round;

  if (box7_) {
    const auto res = box7_pairer_.push(round.index, round.alice.window, round.bob.window);
    if (res.pair) {
      const PairRecord r = make_pair_record(res.z ? open7z_ : open7x_, round, slices_);
      tallies_.box7.add(r);
      if (pair_observer_) pair_observer_(r, true);
    }
    if (box7_pairer_.open_z() == round.index) open7z_ = round;
    if (box7_pairer_.open_x() == round.index) open7x_ = round;
  }
}

namespace {

// Cumulative outcome thresholds by (alice source, bob source, emitted slice
// difference).
class ClickTable {
 public:
  explicit ClickTable(const ProtocolConfig& c) : slices_(c.phase_slices) {
    const auto ch = c.channel();
    const std::array<double, 3> level{0.0, c.mu, c.nu};
    cum_.resize(static_cast<std::size_t>(9 * slices_));
    for (int a = 0; a < 3; ++a) {
      for (int b = 0; b < 3; ++b) {
        for (int d = 0; d < slices_; ++d) {
          const auto p = channel::gain_coherent(ch, level[static_cast<std::size_t>(a)],
                                                level[static_cast<std::size_t>(b)],
                                                2.0 * std::numbers::pi * d / slices_);
          auto& t = cum_[static_cast<std::size_t>((a * 3 + b) * slices_ + d)];
          t[0] = p.p[0];
          t[1] = p.p[0] + p.p[1];
          t[2] = p.p[0] + p.p[1] + p.p[2];
        }
      }
    }
  }

  RoundOutcome sample(int a, int b, int diff, double u) const {
    const auto& t = cum_[static_cast<std::size_t>((a * 3 + b) * slices_ + diff)];
    return RoundOutcome{static_cast<std::uint8_t>((u >= t[0]) + (u >= t[1]) + (u >= t[2]))};
  }

 private:
  int slices_;
  std::vector<std::array<double, 3>> cum_;
};

int source_index(const Party& p) {
  if (p.window == Window::X) return 2;
  return p.bit;
}

struct Batch {
  std::vector<std::uint64_t> counts;
  std::vector<RoundRecord> effective;
  std::uint64_t rounds = 0;
};

Batch run_batch(const ProtocolConfig& c, const ClickTable& table, std::uint64_t seed, std::uint64_t batch,
                std::uint64_t first, std::uint64_t last, const RoundObserver* observer) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(batch), static_cast<std::uint32_t>(batch >> 32)};
  std::mt19937_64 gen(seq);
  const int d = c.phase_slices;
  const int states = party_states(d);
  const auto threshold = static_cast<std::uint64_t>(std::ldexp(c.p_z, 32));
  Batch out;
  out.counts.assign(static_cast<std::size_t>(states * states * 4), 0);
  out.rounds = last - first + 1;
  for (std::uint64_t i = first; i <= last; ++i) {
    const std::uint64_t r1 = gen();
    const std::uint64_t r2 = gen();
    const std::uint64_t r3 = gen();
    RoundRecord rec;
    rec.index = i;
    rec.alice.window = (r1 & 0xffffffffu) < threshold ? Window::Z : Window::X;
    rec.bob.window = (r1 >> 32) < threshold ? Window::Z : Window::X;
    rec.alice.bit = static_cast<std::uint8_t>(r2 & 1u);
    rec.bob.bit = static_cast<std::uint8_t>((r2 >> 1) & 1u);
    rec.alice.slice = static_cast<std::uint8_t>((((r2 >> 2) & 0xffffffffu) * static_cast<std::uint64_t>(d)) >> 32);
    rec.bob.slice = static_cast<std::uint8_t>(((r2 >> 34) * static_cast<std::uint64_t>(d)) >> 30);
    const double u = static_cast<double>(r3 >> 11) * 0x1.0p-53;
    const int diff = mod(emitted_slice(rec.alice, d) - emitted_slice(rec.bob, d), d);
    rec.outcome = table.sample(source_index(rec.alice), source_index(rec.bob), diff, u);
    ++out.counts[static_cast<std::size_t>((party_state(rec.alice) * states + party_state(rec.bob)) * 4 +
                                          rec.outcome.code)];
    if (observer) (*observer)(rec);
    if (rec.effective()) out.effective.push_back(rec);
  }
  return out;
}

}  // namespace

Tallies simulate(const ProtocolConfig& config, std::uint64_t seed, const SimulationOptions& options) {
  config.validate();
  if (config.phase_slices > 256) throw std::invalid_argument("simulate: at most 256 phase slices");
  if (options.batch_rounds < 1) throw std::invalid_argument("simulate: batch size must be >= 1");
  const ClickTable table(config);
  TallyBuilder builder(config);
  const std::uint64_t n = config.rounds;
  const std::uint64_t b = options.batch_rounds;
  const std::uint64_t batches = n == 0 ? 0 : (n - 1) / b + 1;
  const RoundObserver* observer = options.round_observer ? &options.round_observer : nullptr;
  const std::uint64_t threads = observer ? 1 : static_cast<std::uint64_t>(std::max(1, options.threads));

  auto launch = [&](std::uint64_t i) {
    const std::uint64_t first = i * b + 1;
    const std::uint64_t last = std::min(n, (i + 1) * b);
    return run_batch(config, table, seed, i, first, last, observer);
  };
  auto consume = [&](const Batch& batch) {
    builder.merge_counts(batch.counts, batch.rounds);
    for (const auto& r : batch.effective) builder.add_effective(r);
  };

  if (threads == 1) {
    for (std::uint64_t i = 0; i < batches; ++i) consume(launch(i));
  } else {
    for (std::uint64_t start = 0; start < batches; start += threads) {
      std::vector<std::future<Batch>> pending;
      for (std::uint64_t i = start; i < std::min(batches, start + threads); ++i) {
        pending.push_back(std::async(std::launch::async, launch, i));
      }
      for (auto& f : pending) consume(f.get());
    }
  }
  return builder.tallies();
}

std::vector<double> round_bin_probabilities(const ProtocolConfig& c) {
  c.validate();
  const int d = c.phase_slices;
  const int states = party_states(d);
  const auto ch = c.channel();
  std::vector<Party> parties(static_cast<std::size_t>(states));
  std::vector<double> weight(static_cast<std::size_t>(states));
  parties[0] = Party{Window::Z, 0, 0};
  parties[1] = Party{Window::Z, 1, 0};
  weight[0] = weight[1] = c.p_z / 2.0;
  for (int s = 0; s < d; ++s) {
    for (int bit = 0; bit < 2; ++bit) {
      const Party p{Window::X, static_cast<std::uint8_t>(bit), static_cast<std::uint8_t>(s)};
      parties[static_cast<std::size_t>(party_state(p))] = p;
      weight[static_cast<std::size_t>(party_state(p))] = (1.0 - c.p_z) / (2.0 * d);
    }
  }
  std::vector<double> out(static_cast<std::size_t>(states * states * 4), 0.0);
  for (int sa = 0; sa < states; ++sa) {
    for (int sb = 0; sb < states; ++sb) {
      const Party& a = parties[static_cast<std::size_t>(sa)];
      const Party& b = parties[static_cast<std::size_t>(sb)];
      std::array<double, 4> p{};
      // A Z-window signal carries a uniformly drawn slice that the state
      // label omits; average over it.
      const bool free_a = a.window == Window::Z;
      const bool free_b = b.window == Window::Z;
      int samples = 0;
      for (int ta = 0; ta < (free_a ? d : 1); ++ta) {
        for (int tb = 0; tb < (free_b ? d : 1); ++tb) {
          Party a2 = a, b2 = b;
          if (free_a) a2.slice = static_cast<std::uint8_t>(ta);
          if (free_b) b2.slice = static_cast<std::uint8_t>(tb);
          const int diff = mod(emitted_slice(a2, d) - emitted_slice(b2, d), d);
          const auto g = channel::gain_coherent(ch, intensity(a2, c.mu, c.nu), intensity(b2, c.mu, c.nu),
                                                2.0 * std::numbers::pi * diff / d);
          for (int o = 0; o < 4; ++o) p[static_cast<std::size_t>(o)] += g.p[static_cast<std::size_t>(o)];
          ++samples;
        }
      }
      const double w = weight[static_cast<std::size_t>(sa)] * weight[static_cast<std::size_t>(sb)] / samples;
      for (int o = 0; o < 4; ++o) out[static_cast<std::size_t>((sa * states + sb) * 4 + o)] = w * p[static_cast<std::size_t>(o)];
    }
  }
  return out;
}

namespace {

Source state_source(int s) {
  if (s == 0) return Source::Vacuum;
  if (s == 1) return Source::Signal;
  return Source::Decoy;
}

// Partner of a party state within a virtual X-type pair: both rounds in
// vacuum, or both X windows with emitted phases differing by 0 or pi.
struct Partner {
  int state;
  bool vacuum;
  int phase;  ///< 0, 1, or -1 for "either" (vacuum carries no phase)
};

std::vector<std::vector<Partner>> partner_lists(int slices) {
  const int states = party_states(slices);
  std::vector<std::vector<Partner>> out(static_cast<std::size_t>(states));
  out[0].push_back({0, true, -1});
  for (int s = 2; s < states; ++s) {
    const int slice = (s - 2) / 2;
    const int bit = (s - 2) % 2;
    const int e = (slice + bit * slices / 2) % slices;
    for (int phase = 0; phase < 2; ++phase) {
      const int target = mod(e - phase * slices / 2, slices);
      out[static_cast<std::size_t>(s)].push_back({2 + 2 * target, false, phase});
      out[static_cast<std::size_t>(s)].push_back({2 + 2 * mod(target - slices / 2, slices) + 1, false, phase});
    }
  }
  return out;
}

int pair_source(bool vacuum_a, bool vacuum_b) { return (vacuum_a ? 1 : 0) + (vacuum_b ? 2 : 0); }

template <class F>
void for_phases(int phase, F&& f) {
  if (phase < 0) {
    f(0);
    f(1);
  } else {
    f(phase);
  }
}

void z_gains(std::span<const double> bins, int states, GainTables& g, std::array<std::array<double, 3>, 3>& total) {
  for (auto& row : total) row.fill(0.0);
  for (int sa = 0; sa < states; ++sa) {
    for (int sb = 0; sb < states; ++sb) {
      const auto a = static_cast<std::size_t>(state_source(sa));
      const auto b = static_cast<std::size_t>(state_source(sb));
      for (int o = 0; o < 4; ++o) {
        const double w = bins[static_cast<std::size_t>((sa * states + sb) * 4 + o)];
        g.qz[a][b][static_cast<std::size_t>(o)] += w;
        total[a][b] += w;
      }
    }
  }
  for (std::size_t a = 0; a < 3; ++a)
    for (std::size_t b = 0; b < 3; ++b)
      for (auto& v : g.qz[a][b]) v = total[a][b] > 0.0 ? v / total[a][b] : 0.0;
}

}  // namespace

GainTables gains_from_bins(std::span<const double> bins, int slices, double mu, double nu, bool distinct_rounds) {
  const int states = party_states(slices);
  if (bins.size() != static_cast<std::size_t>(states * states * 4)) {
    throw std::invalid_argument("gains_from_bins: histogram size does not match the slice count");
  }
  GainTables g;
  g.mu = mu;
  g.nu = nu;
  std::array<std::array<double, 3>, 3> total{};
  z_gains(bins, states, g, total);

  const auto partners = partner_lists(slices);
  std::array<std::array<std::array<std::array<long double, 16>, 2>, 2>, 4> num{};
  std::array<std::array<std::array<long double, 2>, 2>, 4> den{};
  auto at = [&](int sa, int sb, int o) { return static_cast<long double>(bins[static_cast<std::size_t>((sa * states + sb) * 4 + o)]); };
  for (int sa = 0; sa < states; ++sa) {
    for (const auto& pa : partners[static_cast<std::size_t>(sa)]) {
      for (int sb = 0; sb < states; ++sb) {
        long double nj = 0.0L;
        for (int o = 0; o < 4; ++o) nj += at(sa, sb, o);
        if (nj == 0.0L) continue;
        for (const auto& pb : partners[static_cast<std::size_t>(sb)]) {
          const bool same = pa.state == sa && pb.state == sb;
          long double nk = 0.0L;
          for (int o = 0; o < 4; ++o) nk += at(pa.state, pb.state, o);
          std::array<long double, 16> v{};
          for (int oj = 0; oj < 4; ++oj) {
            for (int ok = 0; ok < 4; ++ok) {
              long double x = at(sa, sb, oj) * at(pa.state, pb.state, ok);
              if (distinct_rounds && same && oj == ok) x -= at(sa, sb, oj);
              v[static_cast<std::size_t>(4 * oj + ok)] = x;
            }
          }
          const long double dv = nj * nk - (distinct_rounds && same ? nj : 0.0L);
          const auto src = static_cast<std::size_t>(pair_source(pa.vacuum, pb.vacuum));
          for_phases(pa.phase, [&](int fa) {
            for_phases(pb.phase, [&](int fb) {
              for (std::size_t c = 0; c < 16; ++c) num[src][static_cast<std::size_t>(fa)][static_cast<std::size_t>(fb)][c] += v[c];
              den[src][static_cast<std::size_t>(fa)][static_cast<std::size_t>(fb)] += dv;
            });
          });
        }
      }
    }
  }
  for (std::size_t s = 0; s < 4; ++s)
    for (std::size_t fa = 0; fa < 2; ++fa)
      for (std::size_t fb = 0; fb < 2; ++fb)
        for (std::size_t c = 0; c < 16; ++c)
          g.qx[s][fa][fb][c] = den[s][fa][fb] > 0.0L ? static_cast<double>(num[s][fa][fb][c] / den[s][fa][fb]) : 0.0;
  return g;
}

GainTables empirical_gains(const Tallies& t, double mu, double nu) {
  std::vector<double> bins(t.round_counts.begin(), t.round_counts.end());
  return gains_from_bins(bins, t.slices, mu, nu, true);
}

GainTables gain_sigmas(std::span<const double> probabilities, int slices, std::uint64_t n) {
  const int states = party_states(slices);
  if (probabilities.size() != static_cast<std::size_t>(states * states * 4)) {
    throw std::invalid_argument("gain_sigmas: histogram size does not match the slice count");
  }
  const double rounds = static_cast<double>(n);
  GainTables sigma;
  std::array<std::array<double, 3>, 3> total{};
  GainTables q;
  z_gains(probabilities, states, q, total);
  for (std::size_t a = 0; a < 3; ++a)
    for (std::size_t b = 0; b < 3; ++b)
      for (std::size_t o = 0; o < 4; ++o) {
        const double v = q.qz[a][b][o];
        sigma.qz[a][b][o] = total[a][b] > 0.0 ? std::sqrt(v * (1.0 - v) / (rounds * total[a][b])) : 0.0;
      }

  const GainTables mean = gains_from_bins(probabilities, slices, 0.0, 0.0, false);
  const auto partners = partner_lists(slices);
  auto f = [&](int sa, int sb, int o) { return probabilities[static_cast<std::size_t>((sa * states + sb) * 4 + o)]; };

  // W per class, then the gradient of U/W for every bin.
  std::array<std::array<std::array<double, 2>, 2>, 4> w{};
  for (int sa = 0; sa < states; ++sa)
    for (const auto& pa : partners[static_cast<std::size_t>(sa)])
      for (int sb = 0; sb < states; ++sb)
        for (const auto& pb : partners[static_cast<std::size_t>(sb)]) {
          double fj = 0.0, fk = 0.0;
          for (int o = 0; o < 4; ++o) {
            fj += f(sa, sb, o);
            fk += f(pa.state, pb.state, o);
          }
          const auto src = static_cast<std::size_t>(pair_source(pa.vacuum, pb.vacuum));
          for_phases(pa.phase, [&](int fa) {
            for_phases(pb.phase, [&](int fb) { w[src][static_cast<std::size_t>(fa)][static_cast<std::size_t>(fb)] += fj * fk; });
          });
        }

  std::array<std::array<std::array<std::array<double, 16>, 2>, 2>, 4> g2{};  // sum g^2 f
  std::array<std::array<std::array<std::array<double, 16>, 2>, 2>, 4> g1{};  // sum g f
  for (int sa = 0; sa < states; ++sa) {
    for (int sb = 0; sb < states; ++sb) {
      // Partner sums per class for this (sa, sb).
      std::array<std::array<std::array<std::array<double, 4>, 2>, 2>, 4> ps{};
      std::array<std::array<std::array<bool, 2>, 2>, 4> touched{};
      for (const auto& pa : partners[static_cast<std::size_t>(sa)])
        for (const auto& pb : partners[static_cast<std::size_t>(sb)]) {
          const auto src = static_cast<std::size_t>(pair_source(pa.vacuum, pb.vacuum));
          for_phases(pa.phase, [&](int fa) {
            for_phases(pb.phase, [&](int fb) {
              auto& cell = ps[src][static_cast<std::size_t>(fa)][static_cast<std::size_t>(fb)];
              touched[src][static_cast<std::size_t>(fa)][static_cast<std::size_t>(fb)] = true;
              for (int o = 0; o < 4; ++o) cell[static_cast<std::size_t>(o)] += f(pa.state, pb.state, o);
            });
          });
        }
      for (std::size_t s = 0; s < 4; ++s)
        for (std::size_t fa = 0; fa < 2; ++fa)
          for (std::size_t fb = 0; fb < 2; ++fb) {
            if (!touched[s][fa][fb] || w[s][fa][fb] <= 0.0) continue;
            const auto& p = ps[s][fa][fb];
            const double psum = p[0] + p[1] + p[2] + p[3];
            for (std::size_t c = 0; c < 16; ++c) {
              const std::size_t oj = c / 4, ok = c % 4;
              const double qv = mean.qx[s][fa][fb][c];
              for (std::size_t o = 0; o < 4; ++o) {
                const double fz = f(sa, sb, static_cast<int>(o));
                if (fz == 0.0) continue;
                const double du = (o == oj ? p[ok] : 0.0) + (o == ok ? p[oj] : 0.0);
                const double g = (du - 2.0 * qv * psum) / w[s][fa][fb];
                g2[s][fa][fb][c] += g * g * fz;
                g1[s][fa][fb][c] += g * fz;
              }
            }
          }
    }
  }
  for (std::size_t s = 0; s < 4; ++s)
    for (std::size_t fa = 0; fa < 2; ++fa)
      for (std::size_t fb = 0; fb < 2; ++fb)
        for (std::size_t c = 0; c < 16; ++c) {
          if (w[s][fa][fb] <= 0.0) continue;
          const double qv = mean.qx[s][fa][fb][c];
          const double first = (g2[s][fa][fb][c] - g1[s][fa][fb][c] * g1[s][fa][fb][c]) / rounds;
          const double second = 2.0 * qv / (rounds * rounds * w[s][fa][fb]);
          sigma.qx[s][fa][fb][c] = std::sqrt(std::max(0.0, first) + second);
        }
  return sigma;
}

}  // namespace mpqkd::protosim
