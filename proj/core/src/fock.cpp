#include "mpqkd/fock.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace mpqkd::fock {

namespace {

constexpr double kPi = std::numbers::pi;

double binomial(int n, int k) {
  return std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0));
}

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

}  // namespace

// ---------------------------------------------------------------------------
// ModeLayout

ModeLayout::ModeLayout(std::vector<int> dims) : dims_(std::move(dims)) {
  if (dims_.empty()) throw std::invalid_argument("ModeLayout: at least one mode required");
  strides_.assign(dims_.size(), 1);
  for (int m = static_cast<int>(dims_.size()) - 1; m >= 0; --m) {
    const auto i = static_cast<std::size_t>(m);
    if (dims_[i] < 2) throw std::invalid_argument("ModeLayout: mode dimension must be >= 2");
    strides_[i] = size_;
    size_ *= static_cast<std::size_t>(dims_[i]);
  }
}

ModeLayout ModeLayout::uniform(int modes, int cutoff) {
  if (cutoff < 1) throw std::invalid_argument("cutoff must be >= 1");
  return ModeLayout(std::vector<int>(static_cast<std::size_t>(modes), cutoff + 1));
}

int ModeLayout::cutoff() const { return *std::max_element(dims_.begin(), dims_.end()) - 1; }

std::size_t ModeLayout::index(std::span<const int> occupation) const {
  if (occupation.size() != dims_.size()) throw std::invalid_argument("occupation rank mismatch");
  std::size_t idx = 0;
  for (std::size_t m = 0; m < dims_.size(); ++m) {
    if (occupation[m] < 0 || occupation[m] >= dims_[m]) {
      throw std::out_of_range("occupation exceeds mode dimension");
    }
    idx += static_cast<std::size_t>(occupation[m]) * strides_[m];
  }
  return idx;
}

std::vector<int> ModeLayout::occupation(std::size_t index) const {
  std::vector<int> occ(dims_.size());
  for (std::size_t m = 0; m < dims_.size(); ++m) {
    occ[m] = static_cast<int>(index / strides_[m]);
    index %= strides_[m];
  }
  return occ;
}

// ---------------------------------------------------------------------------
// FockState / DensityOperator

FockState::FockState(ModeLayout layout, Vector amplitudes)
    : layout_(std::move(layout)), amplitudes_(std::move(amplitudes)) {
  if (static_cast<std::size_t>(amplitudes_.size()) != layout_.size()) {
    throw std::invalid_argument("FockState: amplitude count does not match layout");
  }
}

FockState FockState::normalized() const {
  const double n = norm();
  if (n == 0.0) throw std::domain_error("cannot normalize the zero vector");
  return FockState(layout_, amplitudes_ / n);
}

DensityOperator::DensityOperator(ModeLayout layout, Matrix matrix)
    : layout_(std::move(layout)), matrix_(std::move(matrix)) {
  const auto n = static_cast<Eigen::Index>(layout_.size());
  if (matrix_.rows() != n || matrix_.cols() != n) {
    throw std::invalid_argument("DensityOperator: matrix shape does not match layout");
  }
}

DensityOperator DensityOperator::projector(const FockState& state) {
  const Vector& v = state.amplitudes();
  return DensityOperator(state.layout(), v * v.adjoint());
}

double DensityOperator::hermiticity_error() const {
  return (matrix_ - matrix_.adjoint()).cwiseAbs().maxCoeff();
}

std::vector<double> DensityOperator::eigenvalues() const {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(matrix_, Eigen::EigenvaluesOnly);
  const auto& ev = solver.eigenvalues();
  return {ev.data(), ev.data() + ev.size()};
}

DensityOperator& DensityOperator::operator+=(const DensityOperator& other) {
  if (!(layout_ == other.layout_)) throw std::invalid_argument("layout mismatch");
  matrix_ += other.matrix_;
  return *this;
}

// ---------------------------------------------------------------------------
// Poisson weights

double poisson_pmf(double mu, int m) {
  if (m < 0) return 0.0;
  if (mu == 0.0) return m == 0 ? 1.0 : 0.0;
  if (m > 20) return std::exp(-mu + m * std::log(mu) - std::lgamma(m + 1.0));
  double p = std::exp(-mu);
  for (int k = 1; k <= m; ++k) p *= mu / k;
  return p;
}

double poisson_tail(double mu, int cutoff) {
  if (mu == 0.0) return 0.0;
  // Terms decay super-exponentially once m exceeds mu; 400 extra terms is
  // ample for any intensity in the cutoff budget.
  double tail = 0.0;
  for (int m = cutoff + 1; m <= cutoff + 400; ++m) {
    const double p = poisson_pmf(mu, m);
    tail += p;
    if (m > mu && p < 1e-300) break;
  }
  return tail;
}

void require_truncation(double mu, int cutoff, const char* what) {
  const double tail = poisson_tail(mu, cutoff);
  if (!(tail < kTruncationThreshold)) {
    throw TruncationError(std::string(what) + ": Poisson tail " + std::to_string(tail) +
                          " beyond cutoff " + std::to_string(cutoff) + " for mean " +
                          std::to_string(mu));
  }
}

// ---------------------------------------------------------------------------
// State construction

FockState vacuum(int modes, int cutoff) {
  auto layout = ModeLayout::uniform(modes, cutoff);
  Vector amps = Vector::Zero(static_cast<Eigen::Index>(layout.size()));
  amps[0] = 1.0;
  return FockState(std::move(layout), std::move(amps));
}

FockState number_state(std::span<const int> photons, int cutoff) {
  auto layout = ModeLayout::uniform(static_cast<int>(photons.size()), cutoff);
  Vector amps = Vector::Zero(static_cast<Eigen::Index>(layout.size()));
  amps[static_cast<Eigen::Index>(layout.index(photons))] = 1.0;
  return FockState(std::move(layout), std::move(amps));
}

FockState number_state(std::initializer_list<int> photons, int cutoff) {
  return number_state(std::span<const int>(photons.begin(), photons.size()), cutoff);
}

FockState coherent_state(Complex alpha, int cutoff) {
  const double mu = std::norm(alpha);
  require_truncation(mu, cutoff, "coherent_state");
  auto layout = ModeLayout::uniform(1, cutoff);
  Vector amps(cutoff + 1);
  Complex term = std::exp(-mu / 2.0);
  amps[0] = term;
  for (int m = 1; m <= cutoff; ++m) {
    term *= alpha / std::sqrt(static_cast<double>(m));
    amps[m] = term;
  }
  amps /= amps.norm();
  return FockState(std::move(layout), std::move(amps));
}

FockState gamma_state(int m, double delta, int cutoff) {
  if (m < 0 || m > cutoff) throw std::out_of_range("gamma_state: photon number exceeds cutoff");
  auto layout = ModeLayout::uniform(2, cutoff);
  Vector amps = Vector::Zero(static_cast<Eigen::Index>(layout.size()));
  const double scale = std::pow(2.0, -0.5 * m);
  for (int r = 0; r <= m; ++r) {
    amps[static_cast<Eigen::Index>(layout.index({r, m - r}))] =
        scale * std::sqrt(binomial(m, r)) * std::polar(1.0, r * delta);
  }
  return FockState(std::move(layout), std::move(amps));
}

FockState tensor(const FockState& a, const FockState& b) {
  std::vector<int> dims = a.layout().dims();
  dims.insert(dims.end(), b.layout().dims().begin(), b.layout().dims().end());
  const Vector& va = a.amplitudes();
  const Vector& vb = b.amplitudes();
  Vector out(va.size() * vb.size());
  for (Eigen::Index i = 0; i < va.size(); ++i) out.segment(i * vb.size(), vb.size()) = va[i] * vb;
  return FockState(ModeLayout(std::move(dims)), std::move(out));
}

FockState permute_modes(const FockState& state, std::span<const int> order) {
  const ModeLayout& src = state.layout();
  if (static_cast<int>(order.size()) != src.modes()) {
    throw std::invalid_argument("permute_modes: order rank mismatch");
  }
  std::vector<int> dims(order.size());
  for (std::size_t i = 0; i < order.size(); ++i) dims[i] = src.dim(order[i]);
  ModeLayout dst(dims);
  Vector out = Vector::Zero(state.amplitudes().size());
  std::vector<int> occ_new(order.size());
  for (std::size_t idx = 0; idx < src.size(); ++idx) {
    const auto occ = src.occupation(idx);
    for (std::size_t i = 0; i < order.size(); ++i) occ_new[i] = occ[static_cast<std::size_t>(order[i])];
    out[static_cast<Eigen::Index>(dst.index(occ_new))] = state.amplitudes()[static_cast<Eigen::Index>(idx)];
  }
  return FockState(std::move(dst), std::move(out));
}

FockState permute_modes(const FockState& state, std::initializer_list<int> order) {
  return permute_modes(state, std::span<const int>(order.begin(), order.size()));
}

namespace {

// ancilla (dim 2) tensor optical (dim cutoff+1): (|0>|c0> + |1>|c1>)/sqrt(2)
FockState ancilla_branches(const FockState& c0, const FockState& c1) {
  const int cutoff = c0.cutoff();
  ModeLayout layout({2, cutoff + 1});
  Vector amps(2 * (cutoff + 1));
  amps.head(cutoff + 1) = c0.amplitudes() / std::sqrt(2.0);
  amps.tail(cutoff + 1) = c1.amplitudes() / std::sqrt(2.0);
  return FockState(std::move(layout), std::move(amps));
}

}  // namespace

FockState z_window_extended_state(double mu, double theta, int cutoff) {
  return ancilla_branches(vacuum(1, cutoff), coherent_state(std::polar(std::sqrt(mu), theta), cutoff));
}

FockState x_window_extended_state(double nu, double theta, int cutoff) {
  const Complex alpha = std::polar(std::sqrt(nu), theta);
  return ancilla_branches(coherent_state(alpha, cutoff), coherent_state(-alpha, cutoff));
}

FockState z_pair_parity_one_state(double mu, double theta_j, double theta_k, int cutoff) {
  FockState joint = permute_modes(
      tensor(z_window_extended_state(mu, theta_j, cutoff), z_window_extended_state(mu, theta_k, cutoff)),
      {0, 2, 1, 3});
  const ModeLayout& layout = joint.layout();
  Vector amps = joint.amplitudes();
  for (std::size_t idx = 0; idx < layout.size(); ++idx) {
    const auto occ = layout.occupation(idx);
    if (occ[0] == occ[1]) amps[static_cast<Eigen::Index>(idx)] = 0.0;
  }
  return FockState(layout, std::move(amps)).normalized();
}

FockState x_pair_state(double nu, double theta_j, double theta_k, int cutoff) {
  return permute_modes(
      tensor(x_window_extended_state(nu, theta_j, cutoff), x_window_extended_state(nu, theta_k, cutoff)),
      {0, 2, 1, 3});
}

// ---------------------------------------------------------------------------
// Phase integration and the analytic mixtures

DensityOperator phase_randomize(const std::function<FockState(double)>& family, int grid_points) {
  if (grid_points < 64 || !is_power_of_two(grid_points)) {
    throw std::invalid_argument("phase_randomize: grid_points must be a power of two >= 64");
  }
  const FockState first = family(0.0);
  const auto dim = static_cast<Eigen::Index>(first.layout().size());
  Matrix columns(dim, grid_points);
  columns.col(0) = first.amplitudes();
  for (int k = 1; k < grid_points; ++k) {
    FockState s = family(2.0 * kPi * k / grid_points);
    if (!(s.layout() == first.layout())) throw std::invalid_argument("phase_randomize: layout changed");
    columns.col(k) = s.amplitudes();
  }
  // Rows that vanish for every phase contribute exact zeros; integrate on
  // the support only.
  std::vector<Eigen::Index> support;
  for (Eigen::Index r = 0; r < dim; ++r)
    if (columns.row(r).cwiseAbs2().sum() > 0.0) support.push_back(r);
  const auto n = static_cast<Eigen::Index>(support.size());
  Matrix packed(n, grid_points);
  for (Eigen::Index i = 0; i < n; ++i) packed.row(i) = columns.row(support[static_cast<std::size_t>(i)]);
  Matrix small = Matrix::Zero(n, n);
  small.selfadjointView<Eigen::Lower>().rankUpdate(packed, 1.0 / grid_points);
  small.triangularView<Eigen::StrictlyUpper>() = small.adjoint();
  Matrix rho = Matrix::Zero(dim, dim);
  for (Eigen::Index c = 0; c < n; ++c)
    for (Eigen::Index r = 0; r < n; ++r)
      rho(support[static_cast<std::size_t>(r)], support[static_cast<std::size_t>(c)]) = small(r, c);
  return DensityOperator(first.layout(), std::move(rho));
}

namespace {

using SparseKet = std::vector<std::pair<Eigen::Index, Complex>>;

// rho += weight |phi><phi| touching only the nonzero entries of phi.
void add_projector(Matrix& rho, double weight, const SparseKet& phi) {
  for (const auto& [i, a] : phi)
    for (const auto& [j, b] : phi) rho(i, j) += weight * a * std::conj(b);
}

}  // namespace

DensityOperator analytic_rho1(double mu, double delta, int cutoff) {
  require_truncation(mu, cutoff, "analytic_rho1");
  ModeLayout layout({2, 2, cutoff + 1, cutoff + 1});
  const auto dim = static_cast<Eigen::Index>(layout.size());
  Matrix rho = Matrix::Zero(dim, dim);
  for (int m = 0; m <= cutoff; ++m) {
    const SparseKet phi{
        {static_cast<Eigen::Index>(layout.index({0, 1, 0, m})), Complex(1.0 / std::sqrt(2.0), 0.0)},
        {static_cast<Eigen::Index>(layout.index({1, 0, m, 0})), std::polar(1.0 / std::sqrt(2.0), m * delta)}};
    add_projector(rho, poisson_pmf(mu, m), phi);
  }
  return DensityOperator(std::move(layout), std::move(rho));
}

DensityOperator analytic_sigma1(double nu, double delta, int cutoff) {
  require_truncation(2.0 * nu, cutoff, "analytic_sigma1");
  ModeLayout layout({2, 2, cutoff + 1, cutoff + 1});
  const auto dim = static_cast<Eigen::Index>(layout.size());
  Matrix rho = Matrix::Zero(dim, dim);
  for (int m = 0; m <= cutoff; ++m) {
    const double sign = (m % 2 == 0) ? 1.0 : -1.0;
    SparseKet phi;
    for (int s : {0, 1}) {
      // st runs over {00, 10}; the partner ket is |s^1, 1>.
      const FockState g = gamma_state(m, delta + s * kPi, cutoff);
      for (int r = 0; r <= m; ++r) {
        const Complex amp = 0.5 * g.amplitude({r, m - r});
        phi.emplace_back(static_cast<Eigen::Index>(layout.index({s, 0, r, m - r})), amp);
        phi.emplace_back(static_cast<Eigen::Index>(layout.index({1 - s, 1, r, m - r})), sign * amp);
      }
    }
    add_projector(rho, poisson_pmf(2.0 * nu, m), phi);
  }
  return DensityOperator(std::move(layout), std::move(rho));
}

// ---------------------------------------------------------------------------
// Block structure and distances

namespace {

std::vector<int> block_ids(const ModeLayout& layout, std::span<const int> modes) {
  std::vector<int> ids(layout.size());
  for (std::size_t idx = 0; idx < layout.size(); ++idx) {
    const auto occ = layout.occupation(idx);
    int total = 0;
    for (int m : modes) total += occ[static_cast<std::size_t>(m)];
    ids[idx] = total;
  }
  return ids;
}

Matrix gather(const Matrix& full, const std::vector<std::size_t>& idx) {
  const auto n = static_cast<Eigen::Index>(idx.size());
  Matrix block(n, n);
  for (Eigen::Index r = 0; r < n; ++r)
    for (Eigen::Index c = 0; c < n; ++c)
      block(r, c) = full(static_cast<Eigen::Index>(idx[static_cast<std::size_t>(r)]),
                         static_cast<Eigen::Index>(idx[static_cast<std::size_t>(c)]));
  return block;
}

}  // namespace

std::vector<std::vector<std::size_t>> photon_number_blocks(const ModeLayout& layout,
                                                           std::span<const int> modes) {
  const auto ids = block_ids(layout, modes);
  const int max_id = *std::max_element(ids.begin(), ids.end());
  std::vector<std::vector<std::size_t>> blocks(static_cast<std::size_t>(max_id + 1));
  for (std::size_t idx = 0; idx < ids.size(); ++idx) blocks[static_cast<std::size_t>(ids[idx])].push_back(idx);
  std::erase_if(blocks, [](const auto& b) { return b.empty(); });
  return blocks;
}

double off_block_magnitude(const DensityOperator& op, std::span<const int> modes) {
  const auto ids = block_ids(op.layout(), modes);
  const Matrix& a = op.matrix();
  double worst = 0.0;
  for (Eigen::Index c = 0; c < a.cols(); ++c)
    for (Eigen::Index r = 0; r < a.rows(); ++r)
      if (ids[static_cast<std::size_t>(r)] != ids[static_cast<std::size_t>(c)]) worst = std::max(worst, std::abs(a(r, c)));
  return worst;
}

std::vector<double> eigenvalues_by_block(const DensityOperator& op, std::span<const int> modes) {
  std::vector<double> all;
  for (const auto& block : photon_number_blocks(op.layout(), modes)) {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(gather(op.matrix(), block), Eigen::EigenvaluesOnly);
    for (Eigen::Index i = 0; i < solver.eigenvalues().size(); ++i) all.push_back(solver.eigenvalues()[i]);
  }
  std::sort(all.begin(), all.end());
  return all;
}

double trace_distance(const DensityOperator& a, const DensityOperator& b) {
  if (!(a.layout() == b.layout())) throw std::invalid_argument("trace_distance: layout mismatch");
  Eigen::SelfAdjointEigenSolver<Matrix> solver(a.matrix() - b.matrix(), Eigen::EigenvaluesOnly);
  return 0.5 * solver.eigenvalues().cwiseAbs().sum();
}

TraceDistanceBound trace_distance_by_block(const DensityOperator& a, const DensityOperator& b,
                                           std::span<const int> modes) {
  if (!(a.layout() == b.layout())) throw std::invalid_argument("trace_distance: layout mismatch");
  const Matrix diff = a.matrix() - b.matrix();
  const auto ids = block_ids(a.layout(), modes);

  double off_frobenius_sq = 0.0;
  for (Eigen::Index c = 0; c < diff.cols(); ++c)
    for (Eigen::Index r = 0; r < diff.rows(); ++r)
      if (ids[static_cast<std::size_t>(r)] != ids[static_cast<std::size_t>(c)]) off_frobenius_sq += std::norm(diff(r, c));

  double pinched = 0.0;
  for (const auto& block : photon_number_blocks(a.layout(), modes)) {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(gather(diff, block), Eigen::EigenvaluesOnly);
    pinched += solver.eigenvalues().cwiseAbs().sum();
  }
  TraceDistanceBound out;
  out.lower = 0.5 * pinched;
  out.upper = out.lower + 0.5 * std::sqrt(static_cast<double>(diff.rows()) * off_frobenius_sq);
  return out;
}

}  // namespace mpqkd::fock
