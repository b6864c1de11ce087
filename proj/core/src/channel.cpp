#include "mpqkd/channel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace mpqkd::channel {

double ChannelParams::transmittance() const {
  return detector_efficiency * std::pow(10.0, -attenuation_db_per_km * distance_km / 10.0);
}

void ChannelParams::validate() const {
  auto fail = [](const std::string& what) { throw std::invalid_argument("channel: " + what); };
  if (!(distance_km >= 0.0) || !std::isfinite(distance_km)) fail("distance must be finite and >= 0");
  if (!(attenuation_db_per_km >= 0.0)) fail("attenuation must be >= 0");
  if (!(detector_efficiency > 0.0 && detector_efficiency <= 1.0)) fail("detector efficiency must lie in (0, 1]");
  if (!(dark_count >= 0.0 && dark_count < 1.0)) fail("dark count must lie in [0, 1)");
  if (!(visibility >= 0.0 && visibility <= 1.0)) fail("visibility must lie in [0, 1]");
}

RoundPovm::RoundPovm(int cutoff, std::array<Eigen::MatrixXd, 4> elements)
    : cutoff_(cutoff), elements_(std::move(elements)) {
  const Eigen::Index n = static_cast<Eigen::Index>(cutoff + 1) * (cutoff + 1);
  for (const auto& m : elements_) {
    if (m.rows() != n || m.cols() != n) throw std::invalid_argument("RoundPovm: element has wrong shape");
  }
}

double RoundPovm::probability(RoundOutcome o, const fock::FockState& input) const {
  if (input.layout() != fock::ModeLayout::uniform(2, cutoff_)) {
    throw std::invalid_argument("RoundPovm::probability: input must be two modes at the POVM cutoff");
  }
  const fock::Vector& psi = input.amplitudes();
  return psi.dot(elements_[o.code].cast<fock::Complex>() * psi).real();
}

double RoundPovm::completeness_error() const {
  Eigen::MatrixXd sum = elements_[0] + elements_[1] + elements_[2] + elements_[3];
  sum -= Eigen::MatrixXd::Identity(sum.rows(), sum.cols());
  return sum.cwiseAbs().maxCoeff();
}

double RoundPovm::min_eigenvalue() const {
  double lowest = 0.0;
  bool first = true;
  for (const auto& m : elements_) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m, Eigen::EigenvaluesOnly);
    const double v = solver.eigenvalues().minCoeff();
    lowest = first ? v : std::min(lowest, v);
    first = false;
  }
  return lowest;
}

namespace {

// Columns p = 0..N of the matrix mapping |p, N-p>_{cd} into the (a, b) basis
// |r, N-r>. Built by repeated creation so no cancellation-prone sums appear.
std::vector<Eigen::MatrixXd> beam_splitter_blocks(int max_photons) {
  std::vector<Eigen::MatrixXd> blocks(static_cast<std::size_t>(max_photons + 1));
  // states[p][q] is |p, q>_{cd} over r = 0..p+q.
  std::vector<std::vector<Eigen::VectorXd>> states(static_cast<std::size_t>(max_photons + 1));
  const double s = 1.0 / std::numbers::sqrt2;
  auto raise = [s](const Eigen::VectorXd& v, double sign) {
    const Eigen::Index n = v.size();  // input has n-1 photons, n amplitudes
    Eigen::VectorXd out = Eigen::VectorXd::Zero(n + 1);
    for (Eigen::Index r = 0; r < n; ++r) {
      out[r + 1] += s * std::sqrt(static_cast<double>(r + 1)) * v[r];
      out[r] += sign * s * std::sqrt(static_cast<double>(n - r)) * v[r];
    }
    return out;
  };
  for (int p = 0; p <= max_photons; ++p) {
    auto& row = states[static_cast<std::size_t>(p)];
    row.resize(static_cast<std::size_t>(max_photons - p + 1));
    for (int q = 0; p + q <= max_photons; ++q) {
      if (p == 0 && q == 0) {
        row[0] = Eigen::VectorXd::Ones(1);
      } else if (p == 0) {
        row[static_cast<std::size_t>(q)] = raise(row[static_cast<std::size_t>(q - 1)], -1.0) / std::sqrt(static_cast<double>(q));
      } else {
        row[static_cast<std::size_t>(q)] =
            raise(states[static_cast<std::size_t>(p - 1)][static_cast<std::size_t>(q)], 1.0) /
            std::sqrt(static_cast<double>(p));
      }
    }
  }
  for (int n = 0; n <= max_photons; ++n) {
    Eigen::MatrixXd u(n + 1, n + 1);
    for (int p = 0; p <= n; ++p) u.col(p) = states[static_cast<std::size_t>(p)][static_cast<std::size_t>(n - p)];
    blocks[static_cast<std::size_t>(n)] = std::move(u);
  }
  return blocks;
}

// n log(x) with 0 log(0) = 0, for lossless detectors.
double times(int n, double log_x) { return n == 0 ? 0.0 : n * log_x; }

// e^x - e^y for x >= y without cancellation; y may be -inf.
double exp_difference(double x, double y) {
  if (y == -std::numeric_limits<double>::infinity()) return std::exp(x);
  return std::exp(y) * std::expm1(x - y);
}

}  // namespace

RoundPovm build_round_povm(const ChannelParams& params, int cutoff) {
  params.validate();
  if (cutoff < 1) throw std::invalid_argument("build_round_povm: cutoff must be >= 1");
  const double eta = params.transmittance();
  const double v = params.visibility;
  const double pd = params.dark_count;
  const double log_bright = std::log1p(-eta * (1.0 + v) / 2.0);  // constructive port
  const double log_dim = std::log1p(-eta * (1.0 - v) / 2.0);
  const double log_dark = std::log1p(-pd);
  const double log_loss = std::log1p(-eta);

  const Eigen::Index dim = static_cast<Eigen::Index>(cutoff + 1) * (cutoff + 1);
  std::array<Eigen::MatrixXd, 4> elements;
  for (auto& m : elements) m = Eigen::MatrixXd::Zero(dim, dim);

  const auto blocks = beam_splitter_blocks(2 * cutoff);
  for (int n = 0; n <= 2 * cutoff; ++n) {
    const Eigen::MatrixXd& u = blocks[static_cast<std::size_t>(n)];
    std::array<Eigen::VectorXd, 4> w;
    for (auto& x : w) x.resize(n + 1);
    for (int p = 0; p <= n; ++p) {
      const int q = n - p;
      const double log_no_left = log_dark + times(p, log_bright) + times(q, log_dim);
      const double log_no_right = log_dark + times(p, log_dim) + times(q, log_bright);
      const double log_none = 2.0 * log_dark + times(n, log_loss);
      const double only_right = exp_difference(log_no_left, log_none);
      const double only_left = exp_difference(log_no_right, log_none);
      w[0][p] = std::exp(log_none);
      w[1][p] = only_right;
      w[2][p] = only_left;
      // Split by dark counts so that vacuum gives pd^2 exactly.
      const double photon_left = -std::expm1(log_no_left - log_dark);
      const double photon_right = -std::expm1(log_no_right - log_dark);
      const double photon_both =
          photon_left - exp_difference(log_no_right - log_dark, log_none - 2.0 * log_dark);
      w[3][p] = pd * pd + pd * (1.0 - pd) * (photon_left + photon_right) + (1.0 - pd) * (1.0 - pd) * photon_both;
    }
    const int r_lo = std::max(0, n - cutoff);
    const int r_hi = std::min(n, cutoff);
    for (int o = 0; o < 4; ++o) {
      const Eigen::MatrixXd block = u * w[static_cast<std::size_t>(o)].asDiagonal() * u.transpose();
      for (int r = r_lo; r <= r_hi; ++r) {
        const Eigen::Index i = static_cast<Eigen::Index>(r) * (cutoff + 1) + (n - r);
        for (int r2 = r_lo; r2 <= r_hi; ++r2) {
          const Eigen::Index j = static_cast<Eigen::Index>(r2) * (cutoff + 1) + (n - r2);
          elements[static_cast<std::size_t>(o)](i, j) = block(r, r2);
        }
      }
    }
  }
  return RoundPovm(cutoff, std::move(elements));
}

double yield_z(const RoundPovm& povm, int photons_a, int photons_b, RoundOutcome o) {
  return povm(o, photons_a, photons_b, photons_a, photons_b);
}

namespace {

std::vector<fock::Complex> gamma_amplitudes(int m, double delta) {
  std::vector<fock::Complex> c(static_cast<std::size_t>(m + 1));
  for (int r = 0; r <= m; ++r) {
    const double log_binom = std::lgamma(m + 1.0) - std::lgamma(r + 1.0) - std::lgamma(m - r + 1.0);
    const double mag = std::exp(0.5 * log_binom - 0.5 * m * std::numbers::ln2);
    c[static_cast<std::size_t>(r)] = std::polar(mag, r * delta);
  }
  return c;
}

// All 16 chi at once for the (m, n) gamma pair.
std::array<double, 16> yield_x_all(const RoundPovm& povm, int m, int n, double delta_a, double delta_b) {
  if (m > povm.cutoff() || n > povm.cutoff()) throw std::invalid_argument("yield_x_pair: photon number above cutoff");
  const auto ca = gamma_amplitudes(m, delta_a);
  const auto cb = gamma_amplitudes(n, delta_b);
  std::array<double, 16> out{};
  for (int r = 0; r <= m; ++r) {
    for (int s = 0; s <= n; ++s) {
      const fock::Complex left = std::conj(ca[static_cast<std::size_t>(r)] * cb[static_cast<std::size_t>(s)]);
      // Round j conserves photons: r + s = r2 + s2.
      const int total = r + s;
      for (int r2 = std::max(0, total - n); r2 <= std::min(m, total); ++r2) {
        const int s2 = total - r2;
        const double amp = (left * ca[static_cast<std::size_t>(r2)] * cb[static_cast<std::size_t>(s2)]).real();
        if (amp == 0.0) continue;
        for (int oj = 0; oj < 4; ++oj) {
          const double mj = povm(RoundOutcome{static_cast<std::uint8_t>(oj)}, r, s, r2, s2);
          if (mj == 0.0) continue;
          for (int ok = 0; ok < 4; ++ok) {
            const double mk = povm(RoundOutcome{static_cast<std::uint8_t>(ok)}, m - r, n - s, m - r2, n - s2);
            out[static_cast<std::size_t>(4 * oj + ok)] += amp * mj * mk;
          }
        }
      }
    }
  }
  return out;
}

}  // namespace

double yield_x_pair(const RoundPovm& povm, int m, int n, double delta_a, double delta_b, PairOutcome chi) {
  return yield_x_all(povm, m, n, delta_a, delta_b)[chi.code];
}

double pair_probability(const RoundPovm& povm, PairOutcome chi, const fock::FockState& state) {
  const int c = povm.cutoff();
  if (state.layout() != fock::ModeLayout::uniform(4, c)) {
    throw std::invalid_argument("pair_probability: state must be four modes at the POVM cutoff");
  }
  const Eigen::Index d = static_cast<Eigen::Index>(c + 1) * (c + 1);
  const Eigen::Map<const Eigen::Matrix<fock::Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> psi(
      state.amplitudes().data(), d, d);
  const fock::Matrix mj = povm.element(chi.round_j()).cast<fock::Complex>();
  const fock::Matrix mk = povm.element(chi.round_k()).cast<fock::Complex>();
  const fock::Matrix applied = mj * psi * mk.transpose();
  return (psi.conjugate().cwiseProduct(applied)).sum().real();
}

OutcomeDistribution gain_coherent(const ChannelParams& params, double mu_a, double mu_b, double phase_diff) {
  params.validate();
  const double eta = params.transmittance();
  const double pd = params.dark_count;
  const double mean = eta * (mu_a + mu_b) / 2.0;
  const double cross = params.visibility * eta * std::sqrt(mu_a * mu_b) * std::cos(phase_diff);
  const double no_left = (1.0 - pd) * std::exp(-(mean + cross));
  const double no_right = (1.0 - pd) * std::exp(-(mean - cross));
  const double none = (1.0 - pd) * (1.0 - pd) * std::exp(-2.0 * mean);
  OutcomeDistribution out;
  out.p[0] = none;
  out.p[1] = no_left - none;
  out.p[2] = no_right - none;
  out.p[3] = 1.0 - no_left - no_right + none;
  return out;
}

namespace {

// Photon numbers kept when Poisson-averaging with mean `mean`.
int photon_limit(double mean, int cutoff) {
  if (mean <= 0.0) return 0;
  fock::require_truncation(mean, cutoff, "gains_q");
  for (int m = 0; m < cutoff; ++m) {
    if (fock::poisson_tail(mean, m) < 1e-17) return m;
  }
  return cutoff;
}

}  // namespace

GainTables gains_q(const RoundPovm& povm, double mu, double nu) {
  const int c = povm.cutoff();
  GainTables g;
  g.mu = mu;
  g.nu = nu;
  const std::array<double, 3> intensity{0.0, mu, nu};
  for (int a = 0; a < 3; ++a) {
    const int ma = photon_limit(intensity[static_cast<std::size_t>(a)], c);
    for (int b = 0; b < 3; ++b) {
      const int mb = photon_limit(intensity[static_cast<std::size_t>(b)], c);
      auto& cell = g.qz[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)];
      for (int m = 0; m <= ma; ++m) {
        const double pm = fock::poisson_pmf(intensity[static_cast<std::size_t>(a)], m);
        for (int n = 0; n <= mb; ++n) {
          const double w = pm * fock::poisson_pmf(intensity[static_cast<std::size_t>(b)], n);
          for (std::uint8_t o = 0; o < 4; ++o) cell[o] += w * yield_z(povm, m, n, RoundOutcome{o});
        }
      }
    }
  }

  const int m2 = photon_limit(2.0 * nu, c);
  // Yields for every (m, n) up to the 2nu limit, both phase labels.
  std::vector<std::array<std::array<std::array<double, 16>, 2>, 2>> y(
      static_cast<std::size_t>((m2 + 1) * (m2 + 1)));
  for (int m = 0; m <= m2; ++m) {
    for (int n = 0; n <= m2; ++n) {
      auto& cell = y[static_cast<std::size_t>(m * (m2 + 1) + n)];
      for (int pa = 0; pa < 2; ++pa) {
        for (int pb = 0; pb < 2; ++pb) {
          // A zero-photon side carries no phase; reuse the phase-0 result.
          if ((m == 0 && pa == 1) || (n == 0 && pb == 1)) {
            cell[pa][pb] = cell[m == 0 ? 0 : pa][n == 0 ? 0 : pb];
            continue;
          }
          cell[pa][pb] = yield_x_all(povm, m, n, pa * std::numbers::pi, pb * std::numbers::pi);
        }
      }
    }
  }
  const std::array<std::pair<double, double>, 4> sources{
      std::pair{2.0 * nu, 2.0 * nu}, std::pair{0.0, 2.0 * nu}, std::pair{2.0 * nu, 0.0}, std::pair{0.0, 0.0}};
  for (std::size_t s = 0; s < 4; ++s) {
    const auto [ia, ib] = sources[s];
    const int ma = ia > 0.0 ? m2 : 0;
    const int mb = ib > 0.0 ? m2 : 0;
    for (int m = 0; m <= ma; ++m) {
      for (int n = 0; n <= mb; ++n) {
        const double w = fock::poisson_pmf(ia, m) * fock::poisson_pmf(ib, n);
        const auto& cell = y[static_cast<std::size_t>(m * (m2 + 1) + n)];
        for (int pa = 0; pa < 2; ++pa)
          for (int pb = 0; pb < 2; ++pb)
            for (int chi = 0; chi < 16; ++chi) g.qx[s][pa][pb][chi] += w * cell[pa][pb][chi];
      }
    }
  }
  return g;
}

TrueYields true_yields(const RoundPovm& povm) {
  TrueYields t;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (std::uint8_t o = 0; o < 4; ++o) t.yz[a][b][o] = yield_z(povm, a, b, RoundOutcome{o});
  for (int pa = 0; pa < 2; ++pa)
    for (int pb = 0; pb < 2; ++pb)
      t.yx11[pa][pb] = yield_x_all(povm, 1, 1, pa * std::numbers::pi, pb * std::numbers::pi);
  return t;
}

}  // namespace mpqkd::channel
