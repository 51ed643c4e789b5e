#pragma once

#include <optional>
#include <utility>
#include <variant>
#include <vector>

#include "cvnc/common.hpp"

namespace cvnc {

// Truncated Fock-space simulator. Joint dimension cutoff^n_modes is capped at
// kMaxJointDimension; constructors record the truncation tail and operations
// fail loudly (truncation_error) instead of renormalizing silently.
inline constexpr int kMaxJointDimension = 4096;

/// Pure state on n modes with per-mode cutoff d (levels 0..d-1). Amplitudes
/// are stored flat, mode 0 slowest: index = ((n_1*d + n_2)*d + ...).
class FockPure {
 public:
  FockPure(int n_modes, int cutoff, CVec amplitudes);

  int n_modes() const { return n_modes_; }
  int cutoff() const { return cutoff_; }
  const CVec& amplitudes() const { return amp_; }
  CVec& amplitudes() { return amp_; }

  Eigen::Index dim() const { return amp_.size(); }
  Eigen::Index stride(int mode) const;
  double norm() const { return amp_.norm(); }
  double tail_mass() const { return std::max(0.0, 1.0 - amp_.squaredNorm()); }

  cplx amplitude(const std::vector<int>& levels) const;

 private:
  int n_modes_;
  int cutoff_;
  CVec amp_;
};

/// Mixed state as a dense hermitian matrix on the same flattened basis.
/// trace <= 1; the deficit is truncation loss.
class FockDensity {
 public:
  FockDensity(int n_modes, int cutoff, CMat matrix);
  explicit FockDensity(const FockPure& psi);

  int n_modes() const { return n_modes_; }
  int cutoff() const { return cutoff_; }
  const CMat& matrix() const { return rho_; }
  CMat& matrix() { return rho_; }

  Eigen::Index dim() const { return rho_.rows(); }
  Eigen::Index stride(int mode) const;
  double trace() const { return rho_.trace().real(); }
  double tail_mass() const { return std::max(0.0, 1.0 - trace()); }

 private:
  int n_modes_;
  int cutoff_;
  CMat rho_;
};

using FockState = std::variant<FockPure, FockDensity>;

int n_modes_of(const FockState& state);
int cutoff_of(const FockState& state);
double tail_mass_of(const FockState& state);
FockDensity as_density(const FockState& state);

// ---- constructors ----

/// Multi-mode coherent state |alpha_1>...|alpha_n>.
FockPure coherent_state(const std::vector<cplx>& alphas, int cutoff,
                        double tail_budget = kDefaultTruncationBudget);

/// Cutoff satisfying the coherent-state tail guidance d >= |a|^2 + 8|a| + 10.
int suggested_cutoff(double alpha_magnitude);

/// Cat state (|alpha> + sign |-alpha>)/N; sign is +1 or -1.
FockPure cat_state(cplx alpha, int sign, int cutoff,
                   double tail_budget = kDefaultTruncationBudget);

/// Single-mode superposition sum of amplitude * |level>. Input must be
/// normalized; the state is exact (zero tail).
FockPure fock_superposition(const std::vector<std::pair<int, cplx>>& coeffs, int cutoff);

/// Thermal state with the vacuum term removed:
/// rho = (1-p) sum_{n>=1} p^{n-1} |n><n|.
FockDensity thermal_minus_vacuum(double p, int cutoff, double tail_budget = 1e-12);

/// Single-mode thermal state with symplectic eigenvalue d (mean photon
/// number d - 1/2).
FockDensity thermal_state(double d_value, int cutoff, double tail_budget = 1e-12);

FockPure tensor(const FockPure& a, const FockPure& b);
FockDensity tensor(const FockDensity& a, const FockDensity& b);

// ---- passive linear evolution and displacements ----

/// Applies an n-mode unitary U on annihilation operators (alpha -> U alpha
/// on coherent states) by Reck decomposition into two-mode rotations and
/// phase shifters, each applied exactly on the truncated basis. Amplitude
/// pushed past the cutoff is lost and shows up as tail mass.
FockPure apply_mode_unitary(const FockPure& state, const CMat& u);
FockDensity apply_mode_unitary(const FockDensity& state, const CMat& u);

FockPure apply_displacement(const FockPure& state, const std::vector<cplx>& alphas,
                            double tail_budget = 1e-6);
FockDensity apply_displacement(const FockDensity& state, const std::vector<cplx>& alphas,
                               double tail_budget = 1e-6);

/// Truncated single-mode displacement matrix (the exact projection of
/// D(alpha) onto the box, not a unitary re-exponentiation).
CMat displacement_operator(cplx alpha, int cutoff);

/// Truncated single-mode squeeze operator exp(r(a^2 - a^dag^2)/2); test
/// fixture for squeezed Fock states, not a free operation.
CMat squeeze_operator(double r, int cutoff);

// ---- moments and metrology ----

struct QuadratureMoments {
  Vec mean;  // interleaved <x_1>,<p_1>,...
  Mat cov;
};

QuadratureMoments quadrature_moments(const FockPure& state);
QuadratureMoments quadrature_moments(const FockDensity& state);
QuadratureMoments quadrature_moments(const FockState& state);

/// Quadrature QFI matrix from the eigendecomposition of rho,
/// F_st = 1/2 sum_{ij} (li-lj)^2/(li+lj) <i|q_s|j><j|q_t|i>.
/// (This convention is 1/4 of the standard QFI; F = V on pure states.)
Mat qfi_matrix(const FockDensity& rho);

// ---- measurement ----

struct CountOutcome {
  std::vector<int> counts;  // one entry per measured mode
  double probability;
  std::optional<FockState> post;  // absent for the overflow record
};

/// Destructive photon counting on a subset of modes. Outcomes are
/// enumerated up to the cutoff and sorted lexicographically; probabilities
/// sum to 1 - tail.
std::vector<CountOutcome> measure_photon_number(const FockState& state,
                                                const std::vector<int>& modes);

struct ProjectionTarget {
  enum class Kind { vacuum, coherent, fock } kind = Kind::vacuum;
  cplx alpha{};  // coherent
  int level = 0;  // fock
  static ProjectionTarget make_vacuum() { return {}; }
  static ProjectionTarget make_coherent(cplx a) { return {Kind::coherent, a, 0}; }
  static ProjectionTarget make_fock(int l) { return {Kind::fock, {}, l}; }
};

struct ProjectionResult {
  double probability;
  std::optional<FockState> post;  // null when the branch has ~zero weight
};

/// Projects one mode onto the target and discards it.
ProjectionResult project_onto(const FockState& state, int mode, const ProjectionTarget& target);

FockDensity partial_trace(const FockDensity& rho, const std::vector<int>& modes_to_trace);

/// Global-phase convention: largest-magnitude amplitude made real positive.
void fix_global_phase(CVec& amplitudes);

}  // namespace cvnc
