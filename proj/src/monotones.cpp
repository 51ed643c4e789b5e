#include "cvnc/monotones.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

#include "cvnc/fock.hpp"
#include "cvnc/symplectic.hpp"

namespace cvnc {

namespace {

Vec descending_eigenvalues(const Mat& m) {
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (m + m.transpose()));
  return es.eigenvalues().reverse();
}

Vec descending_eigenvalues_c(const CMat& m) {
  Eigen::SelfAdjointEigenSolver<CMat> es(0.5 * (m + m.adjoint()));
  return es.eigenvalues().reverse();
}

void check_symmetric(const Mat& m, const char* who) {
  require(m.rows() == m.cols() && m.rows() % 2 == 0,
          std::string(who) + ": matrix must be 2n x 2n");
  require((m - m.transpose()).cwiseAbs().maxCoeff() <= 1e-9 * std::max(1.0, m.cwiseAbs().maxCoeff()),
          std::string(who) + ": matrix must be symmetric");
}

}  // namespace

Vec v_spectrum(const Mat& v_cov) {
  check_symmetric(v_cov, "v_spectrum");
  const Eigen::Index d = v_cov.rows();
  return descending_eigenvalues(v_cov - 0.5 * Mat::Identity(d, d));
}

Vec w_spectrum(const Mat& v_cov) {
  check_symmetric(v_cov, "w_spectrum");
  const int n = static_cast<int>(v_cov.rows()) / 2;
  const Mat omega = symplectic_form(n);
  // Pair-trace normalization: w_i sums the variance excess over both
  // quadratures of the i-th best symplectic plane, so that W_n = V_2n.
  const Mat w = v_cov + omega * v_cov * omega.transpose() - Mat::Identity(2 * n, 2 * n);
  return descending_eigenvalues_c(complex_halve(w));
}

Vec f_spectrum(const Mat& f_qfi) {
  check_symmetric(f_qfi, "f_spectrum");
  require(descending_eigenvalues(f_qfi).minCoeff() >= -1e-9,
          "f_spectrum: QFI matrix must be positive semidefinite");
  const Eigen::Index d = f_qfi.rows();
  return descending_eigenvalues(positive_part(f_qfi - 0.5 * Mat::Identity(d, d)));
}

Vec g_spectrum(const Mat& f_qfi) {
  check_symmetric(f_qfi, "g_spectrum");
  require(descending_eigenvalues(f_qfi).minCoeff() >= -1e-9,
          "g_spectrum: QFI matrix must be positive semidefinite");
  const int n = static_cast<int>(f_qfi.rows()) / 2;
  const Mat omega = symplectic_form(n);
  const Mat g =
      positive_part(f_qfi + omega * f_qfi * omega.transpose() - Mat::Identity(2 * n, 2 * n));
  return descending_eigenvalues_c(complex_halve(g));
}

Vec partial_sums(const Vec& spectrum) {
  Vec sums(spectrum.size());
  double acc = 0.0;
  for (Eigen::Index k = 0; k < spectrum.size(); ++k) {
    acc += spectrum(k);
    sums(k) = acc;
  }
  return sums;
}

double partial_sum(const Vec& spectrum, int k) {
  require(k >= 1, "partial_sum: k must be positive");
  double acc = 0.0;
  for (Eigen::Index i = 0; i < std::min<Eigen::Index>(k, spectrum.size()); ++i) acc += spectrum(i);
  return acc;
}

MonotoneReport monotone_report(const Mat& v_cov, const Mat& f_qfi) {
  MonotoneReport r;
  r.v = v_spectrum(v_cov);
  r.w = w_spectrum(v_cov);
  r.f = f_spectrum(f_qfi);
  r.g = g_spectrum(f_qfi);
  r.v_partial = partial_sums(r.v);
  r.w_partial = partial_sums(r.w);
  r.f_partial = partial_sums(r.f);
  r.g_partial = partial_sums(r.g);
  return r;
}

double vidal_probability_bound(const Vec& source_spectrum, const Vec& target_spectrum) {
  double bound = 1.0;
  bool constrained = false;
  for (int k = 1; k <= static_cast<int>(target_spectrum.size()); ++k) {
    const double target_k = partial_sum(target_spectrum, k);
    if (target_k <= 0.0) continue;  // p * V_k(target) <= V_k(source) is vacuous
    const double source_k = partial_sum(source_spectrum, k);  // saturates past 2n
    bound = std::min(bound, source_k / target_k);
    constrained = true;
  }
  if (!constrained) return 1.0;
  return std::clamp(bound, 0.0, 1.0);
}

OverlapBound overlap_bound_check(const FockPure& state) {
  QuadratureMoments m = quadrature_moments(state);
  const int n = state.n_modes();
  std::vector<cplx> alphas(n);
  for (int i = 0; i < n; ++i)
    alphas[i] = cplx(m.mean(2 * i), m.mean(2 * i + 1)) / std::sqrt(2.0);
  FockPure matched = coherent_state(alphas, state.cutoff(), 1.0);
  const double overlap = std::norm(matched.amplitudes().dot(state.amplitudes()));

  OverlapBound b;
  b.lhs = 1.0 - overlap;
  b.rhs = n * v_spectrum(m.cov)(0);
  b.holds = b.lhs <= b.rhs + 1e-9;
  return b;
}

}  // namespace cvnc
