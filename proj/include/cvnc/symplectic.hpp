#pragma once

#include "cvnc/common.hpp"

namespace cvnc {

// Quadrature ordering is interleaved (x1,p1,...,xn,pn) throughout.

/// Symplectic form Omega(n): direct sum of n blocks [[0,1],[-1,0]].
Mat symplectic_form(int n_modes);

/// Permutation taking interleaved ordering to grouped (x1..xn,p1..pn).
/// apply as P * v; P * M * P^T for matrices.
Mat interleave_to_grouped_permutation(int n_modes);

bool is_unitary(const CMat& u, double tol = kUnitaryTol);

/// Phase-space image R of an n-mode unitary U acting on annihilation
/// operators, so that coherent first moments transform as alpha -> U alpha.
/// R is orthogonal symplectic (R in K(n)).
Mat mode_unitary_to_orthosymplectic(const CMat& u);

/// Inverse of the above for R in K(n).
CMat orthosymplectic_to_mode_unitary(const Mat& r);

/// Single-mode phase rotation exp(i*theta) as a 2x2 element of K(1).
Mat phase_rotation(double theta);

/// Beam splitter of reflectivity eta between modes i and j of an n-mode
/// network: 2x2 sub-block [[sqrt(1-eta), -sqrt(eta)], [sqrt(eta), sqrt(1-eta)]].
CMat beam_splitter_unitary(double eta, int i, int j, int n_modes);

struct WilliamsonResult {
  Mat s;                   // real symplectic, V = s * diag(d repeated) * s^T
  Vec d;                   // symplectic eigenvalues, descending, one per mode
  bool uncertainty_ok;     // d_min >= 1/2 - tol; false flags an unphysical V
  Mat d_matrix() const;    // diag(d1,d1,...,dn,dn)
};

/// Williamson normal form of a symmetric positive definite V.
WilliamsonResult williamson_decompose(const Mat& v, double uncertainty_tol = 1e-9);

struct CsDecomposition {
  CMat x;        // block-diagonal (n_A, n_B) unitary, applied first
  Mat d;         // real middle factor in canonical cosine-sine form
  CMat y;        // block-diagonal (n_C, n_D) unitary, applied last
  Vec cosines;   // c_1 >= ... >= c_b, the coupled beam-splitter cosines
  int b = 0;     // number of coupled pairs, min(n_A,n_B,n_C,n_D)
};

/// Cosine-sine decomposition U = Y * D * X for input partition (n_A,n_B)
/// and output partition (n_C,n_D). D couples b = min(...) mode pairs via
/// beam splitters; the remaining rows are direct transfers between groups.
CsDecomposition cs_decompose(const CMat& u, int n_a, int n_b, int n_c, int n_d);

/// Positive part [M]^+ = (|M| + M)/2 of a symmetric matrix: eigenvectors
/// kept, negative eigenvalues clamped to zero.
Mat positive_part(const Mat& m);

/// Isomorphism from 2n x 2n real matrices with 2x2 blocks [[a,-b],[b,a]]
/// onto n x n complex matrices a+ib. Rejects inputs whose blocks break the
/// structure beyond tol.
CMat complex_halve(const Mat& m, double tol = 1e-9);

/// Inverse embedding of complex_halve.
Mat complex_double(const CMat& m);

/// Block direct sum diag(a, b).
Mat direct_sum(const Mat& a, const Mat& b);

}  // namespace cvnc
