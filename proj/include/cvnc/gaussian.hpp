#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cvnc/common.hpp"

namespace cvnc {

struct GaussianState {
  Vec mean;  // interleaved first moments
  Mat cov;

  int n_modes() const { return static_cast<int>(cov.rows()) / 2; }
  static GaussianState vacuum(int n_modes);
  static GaussianState from_cov(Mat cov);
};

/// Physicality check V + (i/2) Omega >= 0 within tol.
bool is_physical(const Mat& cov, double tol = 1e-9);
void require_physical(const Mat& cov, double tol = 1e-9);

/// Squeezing criterion: classical iff the smallest eigenvalue of V is
/// >= 1/2 (within tol).
bool is_classical_gaussian(const Mat& cov, double tol = 1e-12);

/// QFI matrix of a Gaussian state, F = (1/4) Omega V^{-1} Omega^T.
Mat gaussian_qfi(const Mat& cov);

struct NMeasures {
  double n1, n2, n3;
  double v_plus, v_minus;
};

/// The single-mode hierarchy N1 = max(1-2v-, 0), N2 = N1/(2v+ - 1),
/// N3 = v+ N2. N2 and N3 are defined as 0 whenever N1 = 0.
NMeasures n_measures(const Mat& cov);

struct Certificate {
  std::string monotone;
  double source_value;
  double target_value;
};

enum class Regime { p0, gpn };

struct ConversionVerdict {
  bool feasible;
  Regime regime;
  std::vector<Certificate> certificates;  // violated monotones when infeasible
};

/// Single-mode Gaussian convertibility: P0 needs N1 and N2 nonincreasing,
/// GPN needs N1 and N3 nonincreasing. First moments are ignored
/// (displacements are free).
ConversionVerdict convertible(const GaussianState& source, const GaussianState& target,
                              Regime regime, double tol = 1e-10);

/// n-mode pure-state convertibility: elementwise s_i(target) <= s_i(source),
/// the shorter list padded with 1.
ConversionVerdict pure_convertible(const Vec& s_source, const Vec& s_target, double tol = 1e-10);

/// Squeezing parameters s_1 >= ... >= s_n >= 1 of a pure Gaussian state
/// (eigenvalues of 2V, one representative per reciprocal pair). Mixed
/// states are rejected with a purity diagnostic.
Vec squeezing_spectrum(const GaussianState& state, double purity_tol = 1e-6);

struct RegionMembership {
  bool inside;
  double margin;  // most-violated slack; >= 0 iff inside
};

/// Membership of the candidate eigenvalue pair v' in the set reachable from
/// v with one beam splitter against a fixed classical ancilla y: the
/// eigenvalue-sum inequalities for 2x2 symmetric matrices plus the trace
/// identity fixing eta.
RegionMembership p0_achievable_region(double v_plus, double v_minus, double y_plus,
                                      double y_minus, double v_plus_prime,
                                      double v_minus_prime, double tol = 1e-10);

/// Conditional covariance A - C (B+Z)^{-1} C^T after projecting the second
/// subsystem onto a pure Gaussian state with covariance Z (det Z = 1/4).
Mat condition_on_gaussian_measurement(const Mat& a, const Mat& b, const Mat& c, const Mat& z);

/// Conditional mean update that goes with the Schur complement:
/// mean_A + C (B+Z)^{-1} (outcome - mean_B).
Vec conditional_mean(const Vec& mean_a, const Vec& mean_b, const Mat& b, const Mat& c,
                     const Mat& z, const Vec& outcome);

struct HomodyneFeedforwardResult {
  double v_plus, v_minus;
  double gamma;
};

/// Vacuum-ancilla beam splitter of reflectivity eta, homodyne on the noisy
/// quadrature, feed-forward displacement with the N3-preserving gain:
///   v-' = (1-eta) v- + eta/2,
///   v+' = (v+/2) / (eta v+ + (1-eta)/2),
///   gamma = sqrt(eta(1-eta)) (v+ - 1/2) / (eta v+ + (1-eta)/2).
HomodyneFeedforwardResult homodyne_feedforward(double v_plus, double v_minus, double eta);

/// f and g spectra of the Gaussian QFI matrix.
std::pair<Vec, Vec> gaussian_fg_spectra(const Mat& cov);

/// V' = (1-eta) R_S V R_S^T + eta R_A Y R_A^T for single-mode V and a
/// classical ancilla Y.
Mat apply_beamsplitter_with_ancilla(const Mat& v, const Mat& y, double eta, const Mat& r_s,
                                    const Mat& r_a);

}  // namespace cvnc
