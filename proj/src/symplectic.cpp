#include "cvnc/symplectic.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace cvnc {

Mat symplectic_form(int n_modes) {
  require(n_modes >= 1, "symplectic_form: mode count must be positive");
  Mat omega = Mat::Zero(2 * n_modes, 2 * n_modes);
  for (int i = 0; i < n_modes; ++i) {
    omega(2 * i, 2 * i + 1) = 1.0;
    omega(2 * i + 1, 2 * i) = -1.0;
  }
  return omega;
}

Mat interleave_to_grouped_permutation(int n_modes) {
  require(n_modes >= 1, "permutation: mode count must be positive");
  Mat p = Mat::Zero(2 * n_modes, 2 * n_modes);
  for (int i = 0; i < n_modes; ++i) {
    p(i, 2 * i) = 1.0;              // x_i
    p(n_modes + i, 2 * i + 1) = 1.0;  // p_i
  }
  return p;
}

bool is_unitary(const CMat& u, double tol) {
  if (u.rows() != u.cols()) return false;
  CMat residual = u.adjoint() * u - CMat::Identity(u.rows(), u.cols());
  return residual.cwiseAbs().maxCoeff() <= tol;
}

Mat mode_unitary_to_orthosymplectic(const CMat& u) {
  require(u.rows() == u.cols(), "mode unitary must be square");
  require(is_unitary(u, 1e-9), "mode unitary fails U^dag U = I");
  const int n = static_cast<int>(u.rows());
  Mat r(2 * n, 2 * n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double a = u(i, j).real();
      const double b = u(i, j).imag();
      r(2 * i, 2 * j) = a;
      r(2 * i, 2 * j + 1) = -b;
      r(2 * i + 1, 2 * j) = b;
      r(2 * i + 1, 2 * j + 1) = a;
    }
  }
  return r;
}

CMat orthosymplectic_to_mode_unitary(const Mat& r) {
  CMat u = complex_halve(r);
  require(is_unitary(u, 1e-8), "matrix is not in K(n)");
  return u;
}

Mat phase_rotation(double theta) {
  Mat r(2, 2);
  r << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
  return r;
}

CMat beam_splitter_unitary(double eta, int i, int j, int n_modes) {
  require(eta >= 0.0 && eta <= 1.0, "beam splitter reflectivity must lie in [0,1]");
  require(i != j, "beam splitter needs two distinct modes");
  require(i >= 0 && j >= 0 && i < n_modes && j < n_modes, "beam splitter mode index out of range");
  CMat u = CMat::Identity(n_modes, n_modes);
  const double c = std::sqrt(1.0 - eta);
  const double s = std::sqrt(eta);
  u(i, i) = c;
  u(i, j) = -s;
  u(j, i) = s;
  u(j, j) = c;
  return u;
}

Mat WilliamsonResult::d_matrix() const {
  const int n = static_cast<int>(d.size());
  Vec diag(2 * n);
  for (int i = 0; i < n; ++i) diag(2 * i) = diag(2 * i + 1) = d(i);
  return diag.asDiagonal();
}

WilliamsonResult williamson_decompose(const Mat& v, double uncertainty_tol) {
  require(v.rows() == v.cols() && v.rows() % 2 == 0, "covariance matrix must be 2n x 2n");
  const int n = static_cast<int>(v.rows()) / 2;
  require((v - v.transpose()).cwiseAbs().maxCoeff() <= 1e-10 * std::max(1.0, v.cwiseAbs().maxCoeff()),
          "covariance matrix must be symmetric");

  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (v + v.transpose()));
  require(es.eigenvalues().minCoeff() > 0.0, "covariance matrix must be positive definite");
  Mat sqrt_v = es.operatorSqrt();

  // Spectral analysis of the antisymmetric matrix V^{1/2} Omega V^{1/2}:
  // its real Schur form is block diagonal with 2x2 blocks [[0,d_i],[-d_i,0]].
  Mat omega = symplectic_form(n);
  Mat m = sqrt_v * omega * sqrt_v;
  m = 0.5 * (m - m.transpose());
  Eigen::RealSchur<Mat> schur(m);
  Mat q = schur.matrixU();
  Mat t = schur.matrixT();

  std::vector<double> d(n);
  for (int i = 0; i < n; ++i) {
    double b = t(2 * i, 2 * i + 1);
    if (b < 0.0) {
      q.col(2 * i).swap(q.col(2 * i + 1));
      b = -b;
    }
    d[i] = b;
  }

  // Sort mode blocks by descending symplectic eigenvalue.
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) { return d[a] > d[b]; });

  Mat q_sorted(2 * n, 2 * n);
  Vec d_sorted(n);
  for (int i = 0; i < n; ++i) {
    q_sorted.col(2 * i) = q.col(2 * order[i]);
    q_sorted.col(2 * i + 1) = q.col(2 * order[i] + 1);
    d_sorted(i) = d[order[i]];
  }
  require(d_sorted(n - 1) > 0.0, "symplectic eigenvalue collapsed to zero");

  Vec inv_sqrt_d(2 * n);
  for (int i = 0; i < n; ++i)
    inv_sqrt_d(2 * i) = inv_sqrt_d(2 * i + 1) = 1.0 / std::sqrt(d_sorted(i));

  WilliamsonResult result;
  result.s = sqrt_v * q_sorted * inv_sqrt_d.asDiagonal();
  result.d = d_sorted;
  result.uncertainty_ok = d_sorted(n - 1) >= 0.5 - uncertainty_tol;
  return result;
}

namespace {

// Transfer counts of the canonical CS form. b coupled pairs plus direct
// transfers between the four groups.
struct CsLayout {
  int b, ac, bc, ad, bd;
};

CsLayout cs_layout(int n_a, int n_b, int n_c, int n_d) {
  CsLayout l;
  l.b = std::min(std::min(n_a, n_b), std::min(n_c, n_d));
  l.ac = std::min(n_a, n_c) - l.b;
  l.bd = std::min(n_b, n_d) - l.b;
  l.ad = std::min(n_a, n_d) - l.b;
  l.bc = std::min(n_b, n_c) - l.b;
  return l;
}

// Gram-Schmidt completion of partially filled orthonormal columns.
// `known` marks columns already set.
void complete_orthonormal(CMat& m, const std::vector<bool>& known) {
  const int dim = static_cast<int>(m.rows());
  std::vector<int> filled, missing;
  for (int j = 0; j < static_cast<int>(known.size()); ++j)
    (known[j] ? filled : missing).push_back(j);

  std::size_t next = 0;
  for (int trial = 0; trial < dim && next < missing.size(); ++trial) {
    CVec cand = CVec::Zero(dim);
    cand(trial) = 1.0;
    for (int pass = 0; pass < 2; ++pass)
      for (int j : filled) cand -= (m.col(j).adjoint() * cand).value() * m.col(j);
    const double norm = cand.norm();
    if (norm > 1e-6) {
      m.col(missing[next]) = cand / norm;
      filled.push_back(missing[next]);
      ++next;
    }
  }
  require(next == missing.size(), "cs_decompose: orthonormal completion failed");
}

}  // namespace

CsDecomposition cs_decompose(const CMat& u, int n_a, int n_b, int n_c, int n_d) {
  const int n = static_cast<int>(u.rows());
  require(u.cols() == n, "cs_decompose: input must be square");
  require(n_a >= 0 && n_b >= 0 && n_c >= 0 && n_d >= 0, "cs_decompose: negative partition size");
  require(n_a + n_b == n && n_c + n_d == n, "cs_decompose: partition sizes must sum to dim(U)");
  require(is_unitary(u, 1e-9), "cs_decompose: input is not unitary");

  const CsLayout lay = cs_layout(n_a, n_b, n_c, n_d);
  const int b = lay.b;

  // Canonical index maps. A columns: [coupled | A->C | A->D]; B columns:
  // [coupled | B->D | B->C]. C rows: [coupled | A->C | B->C]; D rows:
  // [coupled | B->D | A->D].
  const CMat u11 = u.topLeftCorner(n_c, n_a);
  const CMat u12 = u.topRightCorner(n_c, n_b);
  const CMat u21 = u.bottomLeftCorner(n_d, n_a);
  const CMat u22 = u.bottomRightCorner(n_d, n_b);

  CMat x_a(n_a, n_a);
  CMat y_c(n_c, n_c);
  Vec cosines(b);
  if (std::min(n_a, n_c) == 0) {
    // U11 is empty: the adjacent blocks are isometries, so any unitary works.
    x_a = CMat::Identity(n_a, n_a);
    y_c = CMat::Identity(n_c, n_c);
  } else {
    Eigen::JacobiSVD<CMat> svd(u11, Eigen::ComputeFullU | Eigen::ComputeFullV);
    // Singular values arrive descending: lay.ac values pinned at 1 (direct
    // transfers), then the b coupled cosines.
    for (int k = 0; k < lay.ac; ++k) {
      x_a.col(b + k) = svd.matrixV().col(k);
      y_c.col(b + k) = svd.matrixU().col(k);
    }
    for (int k = 0; k < b; ++k) {
      x_a.col(k) = svd.matrixV().col(lay.ac + k);
      y_c.col(k) = svd.matrixU().col(lay.ac + k);
      cosines(k) = std::clamp(svd.singularValues()(lay.ac + k), 0.0, 1.0);
    }
    // Remaining columns of V span ker(U11): the A->D transfers.
    for (int k = 0; k < lay.ad; ++k) x_a.col(b + lay.ac + k) = svd.matrixV().col(lay.ac + b + k);
    // Remaining columns of U: the B->C rows.
    for (int k = 0; k < lay.bc; ++k) y_c.col(b + lay.ac + k) = svd.matrixU().col(lay.ac + b + k);
  }

  // Cosines within roundoff of 1 are snapped exactly; the residual coupling
  // is below working precision and would otherwise seed noise directions.
  const double kSinFloor = 1e-7;
  Vec sines(b);
  for (int k = 0; k < b; ++k) {
    sines(k) = std::sqrt(std::max(0.0, 1.0 - cosines(k) * cosines(k)));
    if (sines(k) < kSinFloor) {
      sines(k) = 0.0;
      cosines(k) = 1.0;
    }
  }

  // Y_D columns from U21 * X_A: coupled columns have norm s_k, A->D columns
  // norm 1. Coupled columns with s ~ 0 are deferred to completion.
  CMat y_d(n_d, n_d);
  std::vector<bool> y_d_known(n_d, false);
  CMat t21 = u21 * x_a;
  for (int k = 0; k < b; ++k) {
    if (sines(k) > kSinFloor) {
      y_d.col(k) = t21.col(k) / sines(k);
      y_d_known[k] = true;
    }
  }
  for (int k = 0; k < lay.ad; ++k) {
    y_d.col(b + lay.bd + k) = t21.col(b + lay.ac + k);
    y_d_known[b + lay.bd + k] = true;
  }

  // X_B columns from rows of Y_C^dag * U12, which are mutually orthogonal
  // with norms s_k (coupled) or 1 (B->C).
  CMat x_b(n_b, n_b);
  std::vector<bool> x_b_known(n_b, false);
  CMat t12 = y_c.adjoint() * u12;
  for (int k = 0; k < b; ++k) {
    if (sines(k) > kSinFloor) {
      x_b.col(k) = t12.row(k).adjoint() / sines(k);
      x_b_known[k] = true;
    }
  }
  for (int k = 0; k < lay.bc; ++k) {
    x_b.col(b + lay.bd + k) = t12.row(b + lay.ac + k).adjoint();
    x_b_known[b + lay.bd + k] = true;
  }

  complete_orthonormal(x_b, x_b_known);

  // B->D columns of Y_D ride along as U22 * x; deferred coupled columns pair
  // with -U22 * x so the corner block lands on -C.
  for (int k = 0; k < lay.bd; ++k) {
    y_d.col(b + k) = u22 * x_b.col(b + k);
    y_d_known[b + k] = true;
  }
  for (int k = 0; k < b; ++k) {
    if (!y_d_known[k]) {
      y_d.col(k) = -u22 * x_b.col(k);
      y_d_known[k] = true;
    }
  }
  complete_orthonormal(y_d, y_d_known);

  CsDecomposition cs;
  cs.b = b;
  cs.cosines = cosines;

  cs.d = Mat::Zero(n, n);
  for (int k = 0; k < b; ++k) {
    cs.d(k, k) = cosines(k);
    cs.d(k, n_a + k) = sines(k);
    cs.d(n_c + k, k) = sines(k);
    cs.d(n_c + k, n_a + k) = -cosines(k);
  }
  for (int k = 0; k < lay.ac; ++k) cs.d(b + k, b + k) = 1.0;
  for (int k = 0; k < lay.bc; ++k) cs.d(b + lay.ac + k, n_a + b + lay.bd + k) = 1.0;
  for (int k = 0; k < lay.bd; ++k) cs.d(n_c + b + k, n_a + b + k) = 1.0;
  for (int k = 0; k < lay.ad; ++k) cs.d(n_c + b + lay.bd + k, b + lay.ac + k) = 1.0;

  cs.x = CMat::Zero(n, n);
  cs.x.topLeftCorner(n_a, n_a) = x_a.adjoint();
  cs.x.bottomRightCorner(n_b, n_b) = x_b.adjoint();

  cs.y = CMat::Zero(n, n);
  cs.y.topLeftCorner(n_c, n_c) = y_c;
  cs.y.bottomRightCorner(n_d, n_d) = y_d;
  return cs;
}

Mat positive_part(const Mat& m) {
  require(m.rows() == m.cols(), "positive_part: matrix must be square");
  require((m - m.transpose()).cwiseAbs().maxCoeff() <= 1e-10 * std::max(1.0, m.cwiseAbs().maxCoeff()),
          "positive_part: matrix must be symmetric");
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (m + m.transpose()));
  Vec clamped = es.eigenvalues().cwiseMax(0.0);
  return es.eigenvectors() * clamped.asDiagonal() * es.eigenvectors().transpose();
}

CMat complex_halve(const Mat& m, double tol) {
  require(m.rows() == m.cols() && m.rows() % 2 == 0, "complex_halve: matrix must be 2n x 2n");
  const int n = static_cast<int>(m.rows()) / 2;
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  CMat half(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double a1 = m(2 * i, 2 * j);
      const double a2 = m(2 * i + 1, 2 * j + 1);
      const double b1 = m(2 * i + 1, 2 * j);
      const double b2 = -m(2 * i, 2 * j + 1);
      if (std::abs(a1 - a2) > tol * scale || std::abs(b1 - b2) > tol * scale)
        throw std::invalid_argument("complex_halve: 2x2 block structure violated");
      half(i, j) = cplx(0.5 * (a1 + a2), 0.5 * (b1 + b2));
    }
  }
  return half;
}

Mat direct_sum(const Mat& a, const Mat& b) {
  Mat out = Mat::Zero(a.rows() + b.rows(), a.cols() + b.cols());
  out.topLeftCorner(a.rows(), a.cols()) = a;
  out.bottomRightCorner(b.rows(), b.cols()) = b;
  return out;
}

Mat complex_double(const CMat& m) {
  require(m.rows() == m.cols(), "complex_double: matrix must be square");
  const int n = static_cast<int>(m.rows());
  Mat full(2 * n, 2 * n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double a = m(i, j).real();
      const double b = m(i, j).imag();
      full(2 * i, 2 * j) = a;
      full(2 * i, 2 * j + 1) = -b;
      full(2 * i + 1, 2 * j) = b;
      full(2 * i + 1, 2 * j + 1) = a;
    }
  }
  return full;
}

}  // namespace cvnc
