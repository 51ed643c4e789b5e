#pragma once

#include <vector>

#include "cvnc/common.hpp"

namespace cvnc {

/// Spectra and partial sums of the four nonclassicality monotone families.
/// v_i: eigenvalues of V - I/2 (descending, may be negative).
/// w_i: doubly degenerate eigenvalues of V + Omega V Omega^T - I, one per
///      symplectic plane; normalized so that W_n = V_2n.
/// f_i: eigenvalues of [F - I/2]^+ (descending, >= 0).
/// g_i: doubly degenerate eigenvalues of [F + Omega F Omega^T - I]^+, one
///      per symplectic plane.
struct MonotoneReport {
  Vec v, w, f, g;
  Vec v_partial, w_partial, f_partial, g_partial;
};

Vec v_spectrum(const Mat& v_cov);
Vec w_spectrum(const Mat& v_cov);
Vec f_spectrum(const Mat& f_qfi);
Vec g_spectrum(const Mat& f_qfi);

/// Cumulative top-k sums of a descending spectrum.
Vec partial_sums(const Vec& spectrum);

/// Top-k partial sum with saturation: k past the end of the spectrum returns
/// the full sum.
double partial_sum(const Vec& spectrum, int k);

MonotoneReport monotone_report(const Mat& v_cov, const Mat& f_qfi);

/// Maximal single-shot conversion probability from weak majorization of the
/// source and target spectra, min over k of the partial-sum ratios. Entries
/// where the target partial sum is <= 0 impose no constraint.
double vidal_probability_bound(const Vec& source_spectrum, const Vec& target_spectrum);

struct OverlapBound {
  double lhs;      // squared trace distance to the moment-matched coherent state
  double rhs;      // n * V_1
  bool holds;
};

class FockPure;

/// Faithfulness bound D_tr^2 <= n * V_1 for a pure state, with D_tr taken
/// against the coherent state sharing the state's first moments.
OverlapBound overlap_bound_check(const FockPure& state);

}  // namespace cvnc
