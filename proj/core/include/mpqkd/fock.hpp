// Truncated Fock-space states and operators.
//
// Every state lives on a product of modes, each with its own local dimension
// (photon numbers 0..dim-1). Optical modes use dim = cutoff + 1; ancilla
// qubits are two-level modes in the same layout, so one index scheme covers
// every state in the library. Basis vectors are ordered lexicographically by
// occupation tuple, first mode most significant.

#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <functional>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <vector>

namespace mpqkd::fock {

using Complex = std::complex<double>;
using Vector = Eigen::VectorXcd;
using Matrix = Eigen::MatrixXcd;

inline constexpr int kDefaultCutoff = 20;
inline constexpr double kTruncationThreshold = 1e-12;
inline constexpr double kNormTolerance = 1e-9;

/// Raised when a Poisson tail beyond the cutoff is too heavy to discard.
class TruncationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ModeLayout {
 public:
  explicit ModeLayout(std::vector<int> dims);

  /// `modes` optical modes, each holding 0..cutoff photons.
  static ModeLayout uniform(int modes, int cutoff);

  int modes() const { return static_cast<int>(dims_.size()); }
  int dim(int mode) const { return dims_[static_cast<std::size_t>(mode)]; }
  const std::vector<int>& dims() const { return dims_; }
  std::size_t size() const { return size_; }
  std::size_t stride(int mode) const { return strides_[static_cast<std::size_t>(mode)]; }

  /// Largest photon number representable in any mode.
  int cutoff() const;

  std::size_t index(std::span<const int> occupation) const;
  std::size_t index(std::initializer_list<int> occupation) const {
    return index(std::span<const int>(occupation.begin(), occupation.size()));
  }
  std::vector<int> occupation(std::size_t index) const;

  bool operator==(const ModeLayout& other) const { return dims_ == other.dims_; }

 private:
  std::vector<int> dims_;
  std::vector<std::size_t> strides_;
  std::size_t size_ = 1;
};

class FockState {
 public:
  FockState(ModeLayout layout, Vector amplitudes);

  const ModeLayout& layout() const { return layout_; }
  const Vector& amplitudes() const { return amplitudes_; }
  int modes() const { return layout_.modes(); }
  int cutoff() const { return layout_.cutoff(); }

  Complex amplitude(std::initializer_list<int> occupation) const {
    return amplitudes_[static_cast<Eigen::Index>(layout_.index(occupation))];
  }
  double norm() const { return amplitudes_.norm(); }
  FockState normalized() const;

 private:
  ModeLayout layout_;
  Vector amplitudes_;
};

class DensityOperator {
 public:
  DensityOperator(ModeLayout layout, Matrix matrix);

  static DensityOperator projector(const FockState& state);

  const ModeLayout& layout() const { return layout_; }
  const Matrix& matrix() const { return matrix_; }
  int modes() const { return layout_.modes(); }
  int cutoff() const { return layout_.cutoff(); }

  double trace() const { return matrix_.trace().real(); }
  /// max |A - A^dagger| over all entries.
  double hermiticity_error() const;
  /// Full spectrum, ascending. Dense O(n^3); use eigenvalues_by_block for
  /// large photon-number-conserving operators.
  std::vector<double> eigenvalues() const;

  DensityOperator& operator+=(const DensityOperator& other);

 private:
  ModeLayout layout_;
  Matrix matrix_;
};

/// e^{-mu} mu^m / m!, evaluated in log space for m > 20.
double poisson_pmf(double mu, int m);
/// sum_{m > cutoff} p_{mu,m}, summed directly so tiny tails keep precision.
double poisson_tail(double mu, int cutoff);
/// Throws TruncationError if poisson_tail(mu, cutoff) >= kTruncationThreshold.
void require_truncation(double mu, int cutoff, const char* what);

FockState vacuum(int modes, int cutoff);
FockState number_state(std::span<const int> photons, int cutoff);
FockState number_state(std::initializer_list<int> photons, int cutoff);

/// Single-mode coherent state |alpha>, renormalized over 0..cutoff.
FockState coherent_state(Complex alpha, int cutoff);

/// Two-mode m-photon state 2^{-m/2} sum_r sqrt(C(m,r)) e^{i r delta} |r, m-r>.
FockState gamma_state(int m, double delta, int cutoff);

FockState tensor(const FockState& a, const FockState& b);
/// Reorders modes so that new mode i is old mode order[i].
FockState permute_modes(const FockState& state, std::span<const int> order);
FockState permute_modes(const FockState& state, std::initializer_list<int> order);

// Extended states with ancilla qubits. Two-mode layouts are (ancilla, optical);
// four-mode pair layouts are (ancilla_j, ancilla_k, optical_j, optical_k).

/// (|0>|0> + |1>|e^{i theta} sqrt(mu)>)/sqrt(2): Z-window source purification.
FockState z_window_extended_state(double mu, double theta, int cutoff);
/// (|0>|e^{i theta} sqrt(nu)> + |1>|-e^{i theta} sqrt(nu)>)/sqrt(2): X window.
FockState x_window_extended_state(double nu, double theta, int cutoff);
/// Two Z-window rounds projected on the ancilla parity-one outcome
/// {|01>,|10>} and renormalized.
FockState z_pair_parity_one_state(double mu, double theta_j, double theta_k, int cutoff);
/// Two X-window rounds, no projection.
FockState x_pair_state(double nu, double theta_j, double theta_k, int cutoff);

/// (1/G) sum_k P(psi(2 pi k / G)); grid_points must be a power of two >= 64.
DensityOperator phase_randomize(const std::function<FockState(double)>& family,
                                int grid_points);

/// sum_m p_{mu,m} P((|01>|0m> + e^{i m delta}|10>|m0>)/sqrt(2)).
DensityOperator analytic_rho1(double mu, double delta, int cutoff);
/// sum_m p_{2nu,m} P(|phi_{1m,delta}>), |phi_{1m,delta}> =
/// (1/2) sum_{st in {00,10}} (|st> + (-1)^m |s^1 t^1>) |gamma_{m, delta + s pi}>.
DensityOperator analytic_sigma1(double nu, double delta, int cutoff);

/// Basis indices grouped by total photon number over `modes`.
std::vector<std::vector<std::size_t>> photon_number_blocks(const ModeLayout& layout,
                                                           std::span<const int> modes);

/// Largest |entry| linking different photon-number blocks.
double off_block_magnitude(const DensityOperator& op, std::span<const int> modes);

/// Spectrum of the block-diagonal part, ascending. Exact when
/// off_block_magnitude is zero.
std::vector<double> eigenvalues_by_block(const DensityOperator& op, std::span<const int> modes);

double trace_distance(const DensityOperator& a, const DensityOperator& b);

struct TraceDistanceBound {
  double lower = 0.0;  ///< pinched (block-diagonal) trace distance
  double upper = 0.0;  ///< lower + sqrt(dim) * ||off-block||_F / 2
};

/// Trace distance bracketed via the block decomposition; avoids the dense
/// eigensolve on large operators.
TraceDistanceBound trace_distance_by_block(const DensityOperator& a, const DensityOperator& b,
                                           std::span<const int> modes);

}  // namespace mpqkd::fock
