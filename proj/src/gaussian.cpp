#include "cvnc/gaussian.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

#include "cvnc/monotones.hpp"
#include "cvnc/symplectic.hpp"

namespace cvnc {

GaussianState GaussianState::vacuum(int n_modes) {
  require(n_modes >= 1, "vacuum: mode count must be positive");
  GaussianState s;
  s.mean = Vec::Zero(2 * n_modes);
  s.cov = 0.5 * Mat::Identity(2 * n_modes, 2 * n_modes);
  return s;
}

GaussianState GaussianState::from_cov(Mat cov) {
  GaussianState s;
  s.mean = Vec::Zero(cov.rows());
  s.cov = std::move(cov);
  return s;
}

bool is_physical(const Mat& cov, double tol) {
  if (cov.rows() != cov.cols() || cov.rows() % 2 != 0) return false;
  if ((cov - cov.transpose()).cwiseAbs().maxCoeff() > 1e-9 * std::max(1.0, cov.cwiseAbs().maxCoeff()))
    return false;
  const int n = static_cast<int>(cov.rows()) / 2;
  CMat test = cov.cast<cplx>() + cplx(0.0, 0.5) * symplectic_form(n).cast<cplx>();
  Eigen::SelfAdjointEigenSolver<CMat> es(test);
  return es.eigenvalues().minCoeff() >= -tol;
}

void require_physical(const Mat& cov, double tol) {
  require(is_physical(cov, tol), "covariance matrix violates the uncertainty relation");
}

bool is_classical_gaussian(const Mat& cov, double tol) {
  require_physical(cov);
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (cov + cov.transpose()));
  return es.eigenvalues().minCoeff() >= 0.5 - tol;
}

Mat gaussian_qfi(const Mat& cov) {
  require(cov.rows() == cov.cols() && cov.rows() % 2 == 0, "gaussian_qfi: V must be 2n x 2n");
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (cov + cov.transpose()));
  require(es.eigenvalues().minCoeff() > 1e-12, "gaussian_qfi: V must be positive definite");
  const int n = static_cast<int>(cov.rows()) / 2;
  const Mat omega = symplectic_form(n);
  Mat inv = es.eigenvectors() * es.eigenvalues().cwiseInverse().asDiagonal() *
            es.eigenvectors().transpose();
  Mat f = 0.25 * omega * inv * omega.transpose();
  return 0.5 * (f + f.transpose());
}

NMeasures n_measures(const Mat& cov) {
  require(cov.rows() == 2 && cov.cols() == 2, "n_measures: input must be single-mode (2x2)");
  require_physical(cov);
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (cov + cov.transpose()));
  NMeasures m;
  m.v_minus = es.eigenvalues()(0);
  m.v_plus = es.eigenvalues()(1);
  m.n1 = std::max(1.0 - 2.0 * m.v_minus, 0.0);
  if (m.n1 == 0.0) {
    // Classical: N2 and N3 vanish by definition, including the coherent-state
    // 0/0 point at v+ = 1/2.
    m.n2 = m.n3 = 0.0;
  } else {
    m.n2 = m.n1 / (2.0 * m.v_plus - 1.0);
    m.n3 = m.v_plus * m.n2;
  }
  return m;
}

ConversionVerdict convertible(const GaussianState& source, const GaussianState& target,
                              Regime regime, double tol) {
  require(source.n_modes() == 1 && target.n_modes() == 1,
          "convertible: single-mode states only; use pure_convertible for n-mode pure states");
  const NMeasures ms = n_measures(source.cov);
  const NMeasures mt = n_measures(target.cov);

  ConversionVerdict verdict;
  verdict.regime = regime;
  verdict.feasible = true;
  auto check = [&](const std::string& name, double sv, double tv) {
    if (tv > sv + tol) {
      verdict.feasible = false;
      verdict.certificates.push_back({name, sv, tv});
    }
  };
  check("N1", ms.n1, mt.n1);
  if (regime == Regime::p0)
    check("N2", ms.n2, mt.n2);
  else
    check("N3", ms.n3, mt.n3);
  return verdict;
}

ConversionVerdict pure_convertible(const Vec& s_source, const Vec& s_target, double tol) {
  auto validate = [&](const Vec& s, const char* who) {
    for (Eigen::Index i = 0; i < s.size(); ++i) {
      require(s(i) >= 1.0 - 1e-9, std::string(who) + ": squeezing parameters must be >= 1");
      if (i > 0) require(s(i) <= s(i - 1) + 1e-12, std::string(who) + ": list must be sorted descending");
    }
  };
  validate(s_source, "pure_convertible source");
  validate(s_target, "pure_convertible target");

  ConversionVerdict verdict;
  verdict.regime = Regime::gpn;
  verdict.feasible = true;
  const Eigen::Index n = std::max(s_source.size(), s_target.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    const double src = i < s_source.size() ? s_source(i) : 1.0;
    const double tgt = i < s_target.size() ? s_target(i) : 1.0;
    if (tgt > src + tol) {
      verdict.feasible = false;
      verdict.certificates.push_back({"s" + std::to_string(i + 1), src, tgt});
    }
  }
  return verdict;
}

Vec squeezing_spectrum(const GaussianState& state, double purity_tol) {
  require_physical(state.cov);
  WilliamsonResult w = williamson_decompose(state.cov);
  for (Eigen::Index i = 0; i < w.d.size(); ++i) {
    if (std::abs(w.d(i) - 0.5) > purity_tol)
      throw std::invalid_argument(
          "squeezing_spectrum: state is mixed (symplectic eigenvalue " + std::to_string(w.d(i)) +
          " differs from 1/2)");
  }
  const int n = state.n_modes();
  Eigen::SelfAdjointEigenSolver<Mat> es(state.cov);
  Vec two_v = 2.0 * es.eigenvalues().reverse();
  Vec s(n);
  for (int i = 0; i < n; ++i) s(i) = std::max(two_v(i), 1.0);
  return s;
}

namespace {

// Slack of the three eigenvalue-sum inequalities at a given eta.
double horn_slack(double eta, double vp, double vm, double yp, double ym, double vpp, double vmp) {
  const double i1 = (1.0 - eta) * vp + eta * yp - vpp;
  const double i2 = (1.0 - eta) * vp + eta * ym - vmp;
  const double i3 = (1.0 - eta) * vm + eta * yp - vmp;
  return std::min({i1, i2, i3});
}

}  // namespace

RegionMembership p0_achievable_region(double v_plus, double v_minus, double y_plus,
                                      double y_minus, double v_plus_prime, double v_minus_prime,
                                      double tol) {
  require(v_plus >= v_minus && v_minus > 0.0, "p0_achievable_region: source pair must be sorted positive");
  require(y_plus >= y_minus, "p0_achievable_region: ancilla pair must be sorted");
  require(y_minus >= 0.5 - 1e-12, "p0_achievable_region: free ancillas are classical (y- >= 1/2)");
  require(v_plus_prime >= v_minus_prime && v_minus_prime > 0.0,
          "p0_achievable_region: candidate pair must be sorted positive");

  const double trace_in = v_plus + v_minus;
  const double trace_anc = y_plus + y_minus;
  const double trace_out = v_plus_prime + v_minus_prime;

  RegionMembership r{};
  if (std::abs(trace_anc - trace_in) > 1e-12) {
    // The trace identity pins eta.
    const double eta = (trace_out - trace_in) / (trace_anc - trace_in);
    double margin = horn_slack(eta, v_plus, v_minus, y_plus, y_minus, v_plus_prime, v_minus_prime);
    margin = std::min({margin, eta, 1.0 - eta});
    r.margin = margin;
  } else {
    // Degenerate direction: any eta conserves the trace; maximize the
    // concave min-slack over eta in [0,1] by ternary search.
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 100; ++it) {
      const double m1 = lo + (hi - lo) / 3.0, m2 = hi - (hi - lo) / 3.0;
      if (horn_slack(m1, v_plus, v_minus, y_plus, y_minus, v_plus_prime, v_minus_prime) <
          horn_slack(m2, v_plus, v_minus, y_plus, y_minus, v_plus_prime, v_minus_prime))
        lo = m1;
      else
        hi = m2;
    }
    const double best = horn_slack(0.5 * (lo + hi), v_plus, v_minus, y_plus, y_minus,
                                   v_plus_prime, v_minus_prime);
    r.margin = std::min(best, -std::abs(trace_out - trace_in));
  }
  r.inside = r.margin >= -tol;
  return r;
}

Mat condition_on_gaussian_measurement(const Mat& a, const Mat& b, const Mat& c, const Mat& z) {
  require(a.rows() == a.cols() && b.rows() == b.cols(), "conditioning blocks must be square");
  require(c.rows() == a.rows() && c.cols() == b.rows(), "conditioning: C block shape mismatch");
  require(z.rows() == b.rows() && z.cols() == b.cols(), "conditioning: Z must match B");
  Mat joint(a.rows() + b.rows(), a.rows() + b.rows());
  joint << a, c, c.transpose(), b;
  require_physical(joint);
  require((z - z.transpose()).cwiseAbs().maxCoeff() <= 1e-9, "conditioning: Z must be symmetric");
  if (z.rows() == 2)
    require(std::abs(z.determinant() - 0.25) <= 1e-6 * std::max(1.0, z.cwiseAbs().maxCoeff()),
            "conditioning: Z must be a pure single-mode covariance (det Z = 1/4)");

  Mat bz = b + z;
  Eigen::FullPivLU<Mat> lu(bz);
  require(lu.isInvertible(), "conditioning: B + Z is singular");
  Mat out = a - c * lu.solve(c.transpose());
  return 0.5 * (out + out.transpose());
}

Vec conditional_mean(const Vec& mean_a, const Vec& mean_b, const Mat& b, const Mat& c,
                     const Mat& z, const Vec& outcome) {
  Mat bz = b + z;
  Eigen::FullPivLU<Mat> lu(bz);
  require(lu.isInvertible(), "conditional_mean: B + Z is singular");
  return mean_a + c * lu.solve(outcome - mean_b);
}

HomodyneFeedforwardResult homodyne_feedforward(double v_plus, double v_minus, double eta) {
  require(v_plus >= v_minus && v_minus > 0.0, "homodyne_feedforward: eigenvalues must satisfy v+ >= v- > 0");
  require(v_plus * v_minus >= 0.25 - 1e-9, "homodyne_feedforward: input violates the uncertainty relation");
  require(eta >= 0.0 && eta <= 1.0, "homodyne_feedforward: eta must lie in [0,1]");

  const double denom = eta * v_plus + (1.0 - eta) * 0.5;
  HomodyneFeedforwardResult out;
  out.v_minus = (1.0 - eta) * v_minus + eta * 0.5;
  out.v_plus = 0.5 * v_plus / denom;
  out.gamma = std::sqrt(eta * (1.0 - eta)) * (v_plus - 0.5) / denom;
  return out;
}

std::pair<Vec, Vec> gaussian_fg_spectra(const Mat& cov) {
  require_physical(cov);
  Mat f = gaussian_qfi(cov);
  return {f_spectrum(f), g_spectrum(f)};
}

Mat apply_beamsplitter_with_ancilla(const Mat& v, const Mat& y, double eta, const Mat& r_s,
                                    const Mat& r_a) {
  require(v.rows() == 2 && y.rows() == 2, "apply_beamsplitter_with_ancilla: single-mode blocks only");
  require(eta >= 0.0 && eta <= 1.0, "apply_beamsplitter_with_ancilla: eta must lie in [0,1]");
  require(is_classical_gaussian(y), "apply_beamsplitter_with_ancilla: ancilla must be classical");
  auto check_rotation = [](const Mat& r) {
    require(r.rows() == 2 && r.cols() == 2, "rotation must be 2x2");
    require((r.transpose() * r - Mat::Identity(2, 2)).cwiseAbs().maxCoeff() <= 1e-9 &&
                std::abs(r.determinant() - 1.0) <= 1e-9,
            "rotation must lie in K(1)");
  };
  check_rotation(r_s);
  check_rotation(r_a);
  Mat out = (1.0 - eta) * r_s * v * r_s.transpose() + eta * r_a * y * r_a.transpose();
  return 0.5 * (out + out.transpose());
}

}  // namespace cvnc
