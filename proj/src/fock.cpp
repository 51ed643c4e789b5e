#include "cvnc/fock.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numeric>

#include "cvnc/symplectic.hpp"

namespace cvnc {

namespace {

Eigen::Index ipow(int base, int exp) {
  Eigen::Index r = 1;
  for (int i = 0; i < exp; ++i) r *= base;
  return r;
}

void check_dimensions(int n_modes, int cutoff) {
  require(n_modes >= 1, "fock state needs at least one mode");
  require(cutoff >= 1, "fock cutoff must be positive");
  double dim = std::pow(static_cast<double>(cutoff), n_modes);
  if (dim > kMaxJointDimension)
    throw std::invalid_argument(
        "joint dimension " + std::to_string(static_cast<long long>(dim)) + " exceeds the cap of " +
        std::to_string(kMaxJointDimension) + "; reduce cutoff or mode count");
}

int level_of(Eigen::Index flat, Eigen::Index stride, int cutoff) {
  return static_cast<int>((flat / stride) % cutoff);
}

}  // namespace

FockPure::FockPure(int n_modes, int cutoff, CVec amplitudes)
    : n_modes_(n_modes), cutoff_(cutoff), amp_(std::move(amplitudes)) {
  check_dimensions(n_modes, cutoff);
  require(amp_.size() == ipow(cutoff, n_modes), "amplitude vector has wrong length");
}

Eigen::Index FockPure::stride(int mode) const {
  require(mode >= 0 && mode < n_modes_, "mode index out of range");
  return ipow(cutoff_, n_modes_ - 1 - mode);
}

cplx FockPure::amplitude(const std::vector<int>& levels) const {
  require(static_cast<int>(levels.size()) == n_modes_, "level tuple has wrong length");
  Eigen::Index idx = 0;
  for (int m = 0; m < n_modes_; ++m) {
    require(levels[m] >= 0 && levels[m] < cutoff_, "level out of range");
    idx = idx * cutoff_ + levels[m];
  }
  return amp_(idx);
}

FockDensity::FockDensity(int n_modes, int cutoff, CMat matrix)
    : n_modes_(n_modes), cutoff_(cutoff), rho_(std::move(matrix)) {
  check_dimensions(n_modes, cutoff);
  const Eigen::Index d = ipow(cutoff, n_modes);
  require(rho_.rows() == d && rho_.cols() == d, "density matrix has wrong shape");
  const double scale = std::max(1.0, rho_.cwiseAbs().maxCoeff());
  require((rho_ - rho_.adjoint()).cwiseAbs().maxCoeff() <= 1e-12 * scale * rho_.rows(),
          "density matrix must be hermitian");
}

FockDensity::FockDensity(const FockPure& psi)
    : n_modes_(psi.n_modes()), cutoff_(psi.cutoff()),
      rho_(psi.amplitudes() * psi.amplitudes().adjoint()) {}

Eigen::Index FockDensity::stride(int mode) const {
  require(mode >= 0 && mode < n_modes_, "mode index out of range");
  return ipow(cutoff_, n_modes_ - 1 - mode);
}

int n_modes_of(const FockState& state) {
  return std::visit([](const auto& s) { return s.n_modes(); }, state);
}

int cutoff_of(const FockState& state) {
  return std::visit([](const auto& s) { return s.cutoff(); }, state);
}

double tail_mass_of(const FockState& state) {
  return std::visit([](const auto& s) { return s.tail_mass(); }, state);
}

FockDensity as_density(const FockState& state) {
  if (std::holds_alternative<FockPure>(state)) return FockDensity(std::get<FockPure>(state));
  return std::get<FockDensity>(state);
}

void fix_global_phase(CVec& amplitudes) {
  Eigen::Index imax = 0;
  amplitudes.cwiseAbs().maxCoeff(&imax);
  const cplx a = amplitudes(imax);
  if (std::abs(a) > 0.0) amplitudes *= std::conj(a) / std::abs(a);
}

int suggested_cutoff(double alpha_magnitude) {
  return static_cast<int>(std::ceil(alpha_magnitude * alpha_magnitude + 8.0 * alpha_magnitude + 10.0));
}

namespace {

CVec coherent_column(cplx alpha, int cutoff) {
  CVec c(cutoff);
  c(0) = std::exp(-0.5 * std::norm(alpha));
  for (int n = 1; n < cutoff; ++n) c(n) = c(n - 1) * alpha / std::sqrt(static_cast<double>(n));
  return c;
}

}  // namespace

FockPure coherent_state(const std::vector<cplx>& alphas, int cutoff, double tail_budget) {
  require(!alphas.empty(), "coherent_state needs at least one mode");
  const int n = static_cast<int>(alphas.size());
  check_dimensions(n, cutoff);
  CVec amp = CVec::Ones(1);
  double worst_alpha = 0.0;
  for (const cplx& a : alphas) {
    CVec col = coherent_column(a, cutoff);
    CVec next(amp.size() * cutoff);
    for (Eigen::Index i = 0; i < amp.size(); ++i)
      next.segment(i * cutoff, cutoff) = amp(i) * col;
    amp = std::move(next);
    worst_alpha = std::max(worst_alpha, std::abs(a));
  }
  FockPure psi(n, cutoff, std::move(amp));
  if (psi.tail_mass() > tail_budget)
    throw truncation_error("coherent_state: tail mass " + std::to_string(psi.tail_mass()) +
                               " exceeds budget; use cutoff >= " +
                               std::to_string(suggested_cutoff(worst_alpha)),
                           psi.tail_mass(), suggested_cutoff(worst_alpha));
  return psi;
}

FockPure cat_state(cplx alpha, int sign, int cutoff, double tail_budget) {
  require(sign == 1 || sign == -1, "cat sign must be +1 or -1");
  if (std::abs(alpha) == 0.0 && sign == -1)
    throw std::invalid_argument("odd cat with alpha = 0 is the null vector");
  const double overlap = std::exp(-2.0 * std::norm(alpha));  // <alpha|-alpha>
  const double norm = std::sqrt(2.0 * (1.0 + sign * overlap));
  CVec amp = (coherent_column(alpha, cutoff) +
              static_cast<double>(sign) * coherent_column(-alpha, cutoff)) /
             norm;
  FockPure psi(1, cutoff, std::move(amp));
  if (psi.tail_mass() > tail_budget)
    throw truncation_error("cat_state: tail mass exceeds budget; use cutoff >= " +
                               std::to_string(suggested_cutoff(std::abs(alpha))),
                           psi.tail_mass(), suggested_cutoff(std::abs(alpha)));
  return psi;
}

FockPure fock_superposition(const std::vector<std::pair<int, cplx>>& coeffs, int cutoff) {
  require(!coeffs.empty(), "fock_superposition needs at least one term");
  CVec amp = CVec::Zero(cutoff);
  for (const auto& [level, coeff] : coeffs) {
    require(level >= 0 && level < cutoff, "fock_superposition: level must be below the cutoff");
    amp(level) += coeff;
  }
  require(std::abs(amp.squaredNorm() - 1.0) <= 1e-10,
          "fock_superposition: input coefficients must be normalized");
  return FockPure(1, cutoff, std::move(amp));
}

FockDensity thermal_minus_vacuum(double p, int cutoff, double tail_budget) {
  require(p > 0.0 && p < 1.0, "thermal_minus_vacuum: p must lie in (0,1)");
  CMat rho = CMat::Zero(cutoff, cutoff);
  double weight = 1.0 - p;
  for (int n = 1; n < cutoff; ++n) {
    rho(n, n) = weight;
    weight *= p;
  }
  const double tail = std::pow(p, cutoff - 1);
  if (tail > tail_budget) {
    const int needed = static_cast<int>(std::ceil(std::log(tail_budget) / std::log(p))) + 2;
    throw truncation_error("thermal_minus_vacuum: geometric tail " + std::to_string(tail) +
                               " exceeds budget; use cutoff >= " + std::to_string(needed),
                           tail, needed);
  }
  return FockDensity(1, cutoff, std::move(rho));
}

FockDensity thermal_state(double d_value, int cutoff, double tail_budget) {
  require(d_value >= 0.5, "thermal_state: symplectic eigenvalue must be >= 1/2");
  const double nbar = d_value - 0.5;
  CMat rho = CMat::Zero(cutoff, cutoff);
  if (nbar <= 0.0) {
    rho(0, 0) = 1.0;
    return FockDensity(1, cutoff, std::move(rho));
  }
  const double q = nbar / (1.0 + nbar);
  double weight = 1.0 / (1.0 + nbar);
  for (int n = 0; n < cutoff; ++n) {
    rho(n, n) = weight;
    weight *= q;
  }
  const double tail = std::pow(q, cutoff);
  if (tail > tail_budget) {
    const int needed = static_cast<int>(std::ceil(std::log(tail_budget) / std::log(q))) + 2;
    throw truncation_error("thermal_state: geometric tail exceeds budget; use cutoff >= " +
                               std::to_string(needed),
                           tail, needed);
  }
  return FockDensity(1, cutoff, std::move(rho));
}

FockPure tensor(const FockPure& a, const FockPure& b) {
  require(a.cutoff() == b.cutoff(), "tensor: cutoffs must match");
  check_dimensions(a.n_modes() + b.n_modes(), a.cutoff());
  CVec amp(a.dim() * b.dim());
  for (Eigen::Index i = 0; i < a.dim(); ++i)
    amp.segment(i * b.dim(), b.dim()) = a.amplitudes()(i) * b.amplitudes();
  return FockPure(a.n_modes() + b.n_modes(), a.cutoff(), std::move(amp));
}

FockDensity tensor(const FockDensity& a, const FockDensity& b) {
  require(a.cutoff() == b.cutoff(), "tensor: cutoffs must match");
  check_dimensions(a.n_modes() + b.n_modes(), a.cutoff());
  const Eigen::Index da = a.dim(), db = b.dim();
  CMat rho(da * db, da * db);
  for (Eigen::Index i = 0; i < da; ++i)
    for (Eigen::Index j = 0; j < da; ++j)
      rho.block(i * db, j * db, db, db) = a.matrix()(i, j) * b.matrix();
  return FockDensity(a.n_modes() + b.n_modes(), a.cutoff(), std::move(rho));
}

// ---------------------------------------------------------------------------
// Passive linear evolution
// ---------------------------------------------------------------------------

namespace {

// Exact number-conserving blocks of the two-mode rotation
// exp(theta (a2^dag a1 - a1^dag a2)), restricted to levels below the cutoff.
// Block N couples |m, N-m>; levels outside the box are projected away.
struct TwoModeRotation {
  int cutoff;
  // For each total photon number N: the orthogonal block restricted to
  // in-box rows/columns, and the in-box level range [lo, hi].
  std::vector<Mat> blocks;
  std::vector<int> lo;
};

TwoModeRotation make_two_mode_rotation(double theta, int cutoff) {
  TwoModeRotation rot;
  rot.cutoff = cutoff;
  const int n_max = 2 * (cutoff - 1);
  rot.blocks.reserve(n_max + 1);
  rot.lo.reserve(n_max + 1);
  for (int total = 0; total <= n_max; ++total) {
    // Full (total+1)-dim antisymmetric tridiagonal generator, exponentiated
    // through the hermitian eigenproblem of i*G.
    const int dim = total + 1;
    CMat h = CMat::Zero(dim, dim);
    for (int m = 1; m <= total; ++m) {
      const double g = theta * std::sqrt(static_cast<double>(m) * (total - m + 1));
      h(m - 1, m) = cplx(0.0, 1.0) * g;   // i * G[m-1][m]
      h(m, m - 1) = cplx(0.0, -1.0) * g;
    }
    Eigen::SelfAdjointEigenSolver<CMat> es(h);
    CVec phases(dim);
    for (int k = 0; k < dim; ++k)
      phases(k) = std::exp(cplx(0.0, -es.eigenvalues()(k)));
    CMat full = es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();

    const int box_lo = std::max(0, total - (cutoff - 1));
    const int box_hi = std::min(total, cutoff - 1);
    const int width = box_hi - box_lo + 1;
    rot.blocks.push_back(full.block(box_lo, box_lo, width, width).real());
    rot.lo.push_back(box_lo);
  }
  return rot;
}

// Applies the rotation to modes (mode_a, mode_b) of a flat amplitude vector.
void apply_rotation_pure(CVec& amp, int n_modes, int cutoff, int mode_a, int mode_b,
                         const TwoModeRotation& rot) {
  const Eigen::Index sa = ipow(cutoff, n_modes - 1 - mode_a);
  const Eigen::Index sb = ipow(cutoff, n_modes - 1 - mode_b);
  const Eigen::Index dim = amp.size();
  std::vector<Eigen::Index> base_indices;
  base_indices.reserve(dim / (cutoff * cutoff));
  for (Eigen::Index idx = 0; idx < dim; ++idx) {
    if (level_of(idx, sa, cutoff) == 0 && level_of(idx, sb, cutoff) == 0)
      base_indices.push_back(idx);
  }

  CVec in(cutoff), out(cutoff);
  for (Eigen::Index base : base_indices) {
    for (int total = 0; total <= 2 * (cutoff - 1); ++total) {
      const Mat& block = rot.blocks[total];
      const int lo = rot.lo[total];
      const int width = static_cast<int>(block.rows());
      for (int k = 0; k < width; ++k) {
        const int m = lo + k;
        in(k) = amp(base + m * sa + (total - m) * sb);
      }
      out.head(width).noalias() = block * in.head(width);
      for (int k = 0; k < width; ++k) {
        const int m = lo + k;
        amp(base + m * sa + (total - m) * sb) = out(k);
      }
    }
  }
}

void apply_phase_pure(CVec& amp, int n_modes, int cutoff, int mode, double phi) {
  const Eigen::Index stride = ipow(cutoff, n_modes - 1 - mode);
  std::vector<cplx> phase(cutoff);
  for (int l = 0; l < cutoff; ++l) phase[l] = std::exp(cplx(0.0, phi * l));
  for (Eigen::Index idx = 0; idx < amp.size(); ++idx)
    amp(idx) *= phase[level_of(idx, stride, cutoff)];
}

// One elementary factor of the Reck decomposition.
struct PlFactor {
  enum class Kind { rotation, phase } kind;
  int mode_a = 0, mode_b = 0;
  double theta = 0.0;   // rotation
  double phi = 0.0;     // phase
};

// Decomposes an arbitrary 2x2 unitary into phases and a real rotation:
// B = diag(e^{i l1}, e^{i l2}) * [[c,-s],[s,c]] * diag(1, e^{i r2}).
struct TwoModeFactors {
  double theta, left1, left2, right2;
};

TwoModeFactors split_two_mode(const Eigen::Matrix2cd& b) {
  TwoModeFactors f{};
  const double c = std::abs(b(0, 0));
  const double s = std::abs(b(1, 0));
  f.theta = std::atan2(s, c);
  if (s <= 1e-14) {
    f.left1 = std::arg(b(0, 0));
    f.left2 = std::arg(b(1, 1));
    f.right2 = 0.0;
  } else if (c <= 1e-14) {
    f.left1 = std::arg(-b(0, 1));
    f.left2 = std::arg(b(1, 0));
    f.right2 = 0.0;
  } else {
    f.left1 = std::arg(b(0, 0));
    f.left2 = std::arg(b(1, 0));
    f.right2 = std::arg(b(1, 1)) - f.left2;
  }
  return f;
}

// Reck-style factorization: U = product of two-mode rotations and phase
// shifters, emitted in application order (first factor acts first).
std::vector<PlFactor> reck_factors(const CMat& u) {
  const int n = static_cast<int>(u.rows());
  CMat work = u;
  std::vector<PlFactor> inverse_ops;  // G such that (prod G) * U = diag
  for (int col = 0; col < n - 1; ++col) {
    for (int row = n - 1; row > col; --row) {
      const cplx a = work(row - 1, col);
      const cplx b = work(row, col);
      const double r = std::sqrt(std::norm(a) + std::norm(b));
      if (r <= 1e-15) continue;
      Eigen::Matrix2cd g;
      g << std::conj(a) / r, std::conj(b) / r, -b / r, a / r;
      work({row - 1, row}, Eigen::all) = g * work({row - 1, row}, Eigen::all);
      // record g acting on (row-1, row)
      TwoModeFactors f = split_two_mode(g);
      // store enough to reapply g later; reuse PlFactor list with explicit
      // phases around the rotation
      inverse_ops.push_back({PlFactor::Kind::phase, row, 0, 0.0, f.right2});
      inverse_ops.push_back({PlFactor::Kind::rotation, row - 1, row, f.theta, 0.0});
      inverse_ops.push_back({PlFactor::Kind::phase, row - 1, 0, 0.0, f.left1});
      inverse_ops.push_back({PlFactor::Kind::phase, row, 0, 0.0, f.left2});
    }
  }
  // work is now diagonal: U = (G_1^dag ... G_k^dag) * work.
  std::vector<PlFactor> ops;
  for (int m = 0; m < n; ++m)
    ops.push_back({PlFactor::Kind::phase, m, 0, 0.0, std::arg(work(m, m))});
  // Invert the recorded factors in reverse order.
  for (auto it = inverse_ops.rbegin(); it != inverse_ops.rend(); ++it) {
    PlFactor inv = *it;
    if (inv.kind == PlFactor::Kind::phase) inv.phi = -inv.phi;
    else inv.theta = -inv.theta;
    ops.push_back(inv);
  }
  return ops;
}

// Factor list with rotation blocks precomputed, so density-matrix paths can
// reuse them across columns.
struct CompiledFactor {
  PlFactor op;
  TwoModeRotation rotation;  // valid when op.kind == rotation
};

std::vector<CompiledFactor> compile_factors(const std::vector<PlFactor>& ops, int cutoff) {
  std::vector<CompiledFactor> compiled;
  compiled.reserve(ops.size());
  for (const PlFactor& op : ops) {
    CompiledFactor c;
    c.op = op;
    if (op.kind == PlFactor::Kind::rotation) c.rotation = make_two_mode_rotation(op.theta, cutoff);
    compiled.push_back(std::move(c));
  }
  return compiled;
}

void apply_factors_pure(CVec& amp, int n_modes, int cutoff,
                        const std::vector<CompiledFactor>& ops) {
  for (const CompiledFactor& c : ops) {
    if (c.op.kind == PlFactor::Kind::phase)
      apply_phase_pure(amp, n_modes, cutoff, c.op.mode_a, c.op.phi);
    else
      apply_rotation_pure(amp, n_modes, cutoff, c.op.mode_a, c.op.mode_b, c.rotation);
  }
}

}  // namespace

FockPure apply_mode_unitary(const FockPure& state, const CMat& u) {
  require(u.rows() == state.n_modes(), "apply_mode_unitary: dim(U) must equal the mode count");
  require(is_unitary(u, 1e-9), "apply_mode_unitary: matrix is not unitary");
  auto ops = compile_factors(reck_factors(u), state.cutoff());
  CVec amp = state.amplitudes();
  apply_factors_pure(amp, state.n_modes(), state.cutoff(), ops);
  return FockPure(state.n_modes(), state.cutoff(), std::move(amp));
}

FockDensity apply_mode_unitary(const FockDensity& state, const CMat& u) {
  require(u.rows() == state.n_modes(), "apply_mode_unitary: dim(U) must equal the mode count");
  require(is_unitary(u, 1e-9), "apply_mode_unitary: matrix is not unitary");
  auto ops = compile_factors(reck_factors(u), state.cutoff());
  CMat rho = state.matrix();
  CVec col(rho.rows());
  for (int side = 0; side < 2; ++side) {
    for (Eigen::Index j = 0; j < rho.cols(); ++j) {
      col = rho.col(j);
      apply_factors_pure(col, state.n_modes(), state.cutoff(), ops);
      rho.col(j) = col;
    }
    rho = rho.adjoint().eval();
  }
  return FockDensity(state.n_modes(), state.cutoff(), std::move(rho));
}

CMat displacement_operator(cplx alpha, int cutoff) {
  // Columns follow from D|n+1> = (a^dag - conj(alpha)) D|n> / sqrt(n+1);
  // with a^dag clipped at the cutoff this is the exact projection of D(alpha).
  CMat d(cutoff, cutoff);
  d.col(0) = coherent_column(alpha, cutoff);
  for (int n = 0; n + 1 < cutoff; ++n) {
    CVec next = CVec::Zero(cutoff);
    for (int m = 1; m < cutoff; ++m) next(m) = std::sqrt(static_cast<double>(m)) * d(m - 1, n);
    next -= std::conj(alpha) * d.col(n);
    d.col(n + 1) = next / std::sqrt(static_cast<double>(n + 1));
  }
  return d;
}

CMat squeeze_operator(double r, int cutoff) {
  CMat h = CMat::Zero(cutoff, cutoff);
  for (int n = 0; n + 2 < cutoff; ++n) {
    const double g = 0.5 * r * std::sqrt(static_cast<double>((n + 1) * (n + 2)));
    h(n, n + 2) = cplx(0.0, 1.0) * g;    // i * (r/2) a^2 part
    h(n + 2, n) = cplx(0.0, -1.0) * g;
  }
  Eigen::SelfAdjointEigenSolver<CMat> es(h);
  CVec phases(cutoff);
  for (int k = 0; k < cutoff; ++k) phases(k) = std::exp(cplx(0.0, -es.eigenvalues()(k)));
  return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

namespace {

// Applies a single-mode operator matrix to one mode of a flat vector.
void apply_single_mode_matrix(CVec& amp, int n_modes, int cutoff, int mode, const CMat& op) {
  const Eigen::Index stride = ipow(cutoff, n_modes - 1 - mode);
  const Eigen::Index dim = amp.size();
  CVec in(cutoff), out(cutoff);
  for (Eigen::Index base = 0; base < dim; ++base) {
    if (level_of(base, stride, cutoff) != 0) continue;
    for (int l = 0; l < cutoff; ++l) in(l) = amp(base + l * stride);
    out.noalias() = op * in;
    for (int l = 0; l < cutoff; ++l) amp(base + l * stride) = out(l);
  }
}

}  // namespace

FockPure apply_displacement(const FockPure& state, const std::vector<cplx>& alphas,
                            double tail_budget) {
  require(static_cast<int>(alphas.size()) == state.n_modes(),
          "apply_displacement: one amplitude per mode required");
  CVec amp = state.amplitudes();
  const double norm_before = amp.squaredNorm();
  double worst = 0.0;
  for (int m = 0; m < state.n_modes(); ++m) {
    if (std::abs(alphas[m]) == 0.0) continue;
    CMat d = displacement_operator(alphas[m], state.cutoff());
    apply_single_mode_matrix(amp, state.n_modes(), state.cutoff(), m, d);
    worst = std::max(worst, std::abs(alphas[m]));
  }
  const double lost = norm_before - amp.squaredNorm();
  if (lost > tail_budget) {
    const int needed = state.cutoff() + suggested_cutoff(worst);
    throw truncation_error("apply_displacement: lost norm " + std::to_string(lost) +
                               " exceeds budget; use cutoff >= " + std::to_string(needed),
                           lost, needed);
  }
  return FockPure(state.n_modes(), state.cutoff(), std::move(amp));
}

FockDensity apply_displacement(const FockDensity& state, const std::vector<cplx>& alphas,
                               double tail_budget) {
  require(static_cast<int>(alphas.size()) == state.n_modes(),
          "apply_displacement: one amplitude per mode required");
  CMat rho = state.matrix();
  const double trace_before = rho.trace().real();
  double worst = 0.0;
  for (int m = 0; m < state.n_modes(); ++m) {
    if (std::abs(alphas[m]) == 0.0) continue;
    CMat d = displacement_operator(alphas[m], state.cutoff());
    CVec col(rho.rows());
    for (int side = 0; side < 2; ++side) {
      for (Eigen::Index j = 0; j < rho.cols(); ++j) {
        col = rho.col(j);
        apply_single_mode_matrix(col, state.n_modes(), state.cutoff(), m, d);
        rho.col(j) = col;
      }
      rho = rho.adjoint().eval();
    }
    worst = std::max(worst, std::abs(alphas[m]));
  }
  const double lost = trace_before - rho.trace().real();
  if (lost > tail_budget) {
    const int needed = state.cutoff() + suggested_cutoff(worst);
    throw truncation_error("apply_displacement: lost trace exceeds budget; use cutoff >= " +
                               std::to_string(needed),
                           lost, needed);
  }
  return FockDensity(state.n_modes(), state.cutoff(), std::move(rho));
}

// ---------------------------------------------------------------------------
// Moments
// ---------------------------------------------------------------------------

namespace {

// a_mode |psi>
CVec apply_annihilation(const CVec& amp, int n_modes, int cutoff, int mode) {
  const Eigen::Index stride = ipow(cutoff, n_modes - 1 - mode);
  CVec out = CVec::Zero(amp.size());
  for (Eigen::Index idx = 0; idx < amp.size(); ++idx) {
    const int l = level_of(idx, stride, cutoff);
    if (l > 0) out(idx - stride) = std::sqrt(static_cast<double>(l)) * amp(idx);
  }
  return out;
}

// Exact tridiagonal quadrature matrices applied on the truncated space.
// quad = 2*mode for x, 2*mode+1 for p. Products of these (not the
// untruncated commutation relations) define all second moments, keeping the
// moments consistent with the QFI at the truncation boundary.
CVec apply_quadrature(const CVec& amp, int n_modes, int cutoff, int quad) {
  const int mode = quad / 2;
  const bool momentum = quad % 2 == 1;
  const Eigen::Index stride = ipow(cutoff, n_modes - 1 - mode);
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  CVec out = CVec::Zero(amp.size());
  for (Eigen::Index idx = 0; idx < amp.size(); ++idx) {
    const int l = level_of(idx, stride, cutoff);
    cplx acc = 0.0;
    if (l + 1 < cutoff) {
      const cplx up = std::sqrt(static_cast<double>(l + 1)) * amp(idx + stride);
      acc += momentum ? cplx(0.0, -1.0) * up : up;
    }
    if (l > 0) {
      const cplx down = std::sqrt(static_cast<double>(l)) * amp(idx - stride);
      acc += momentum ? cplx(0.0, 1.0) * down : down;
    }
    out(idx) = inv_sqrt2 * acc;
  }
  return out;
}

CMat apply_quadrature_left(const CMat& rho, int n_modes, int cutoff, int quad) {
  CMat out(rho.rows(), rho.cols());
  for (Eigen::Index j = 0; j < rho.cols(); ++j)
    out.col(j) = apply_quadrature(rho.col(j), n_modes, cutoff, quad);
  return out;
}

}  // namespace

QuadratureMoments quadrature_moments(const FockPure& state) {
  const int n = state.n_modes();
  const CVec& psi = state.amplitudes();
  std::vector<CVec> q_psi(2 * n);
  for (int s = 0; s < 2 * n; ++s) q_psi[s] = apply_quadrature(psi, n, state.cutoff(), s);

  QuadratureMoments m;
  m.mean.resize(2 * n);
  for (int s = 0; s < 2 * n; ++s) m.mean(s) = psi.dot(q_psi[s]).real();
  m.cov.resize(2 * n, 2 * n);
  for (int s = 0; s < 2 * n; ++s)
    for (int t = s; t < 2 * n; ++t)
      m.cov(s, t) = m.cov(t, s) = q_psi[s].dot(q_psi[t]).real() - m.mean(s) * m.mean(t);
  return m;
}

QuadratureMoments quadrature_moments(const FockDensity& state) {
  const int n = state.n_modes();
  std::vector<CMat> q_rho(2 * n);
  for (int s = 0; s < 2 * n; ++s)
    q_rho[s] = apply_quadrature_left(state.matrix(), n, state.cutoff(), s);

  QuadratureMoments m;
  m.mean.resize(2 * n);
  for (int s = 0; s < 2 * n; ++s) m.mean(s) = q_rho[s].trace().real();
  m.cov.resize(2 * n, 2 * n);
  for (int s = 0; s < 2 * n; ++s) {
    for (int t = s; t < 2 * n; ++t) {
      // Re tr(q_s q_t rho) equals the symmetrized moment
      const cplx qsqt = apply_quadrature_left(q_rho[t], n, state.cutoff(), s).trace();
      m.cov(s, t) = m.cov(t, s) = qsqt.real() - m.mean(s) * m.mean(t);
    }
  }
  return m;
}

QuadratureMoments quadrature_moments(const FockState& state) {
  return std::visit([](const auto& s) { return quadrature_moments(s); }, state);
}

// ---------------------------------------------------------------------------
// QFI
// ---------------------------------------------------------------------------

Mat qfi_matrix(const FockDensity& rho_in) {
  const int n = rho_in.n_modes();
  const int cutoff = rho_in.cutoff();
  const Eigen::Index dim = rho_in.dim();
  Eigen::SelfAdjointEigenSolver<CMat> es(rho_in.matrix());
  require(es.eigenvalues().minCoeff() >= -1e-10,
          "qfi_matrix: density matrix has a negative eigenvalue");

  // Eigenvalues below 1e-12 count as exact zeros; pairs with li+lj < 1e-14
  // contribute nothing since (li-lj)^2/(li+lj) <= li+lj.
  Vec lam = es.eigenvalues().cwiseMax(0.0);
  std::vector<int> nz;
  for (Eigen::Index i = 0; i < dim; ++i)
    if (lam(i) > 1e-12) nz.push_back(static_cast<int>(i));
  const int r = static_cast<int>(nz.size());

  CMat w_nz(dim, r);
  for (int k = 0; k < r; ++k) w_nz.col(k) = es.eigenvectors().col(nz[k]);

  // Quadrature operators in the eigenbasis, restricted to nonzero rows.
  std::vector<CMat> quad(2 * n);
  for (int mode = 0; mode < n; ++mode) {
    CMat a_w(dim, dim);
    for (Eigen::Index j = 0; j < dim; ++j)
      a_w.col(j) = apply_annihilation(es.eigenvectors().col(j), n, cutoff, mode);
    CMat a_in_basis = w_nz.adjoint() * a_w;       // r x dim: <nz_i| a |j>
    CMat adag_in_basis(r, dim);                    // <nz_i| a^dag |j>
    CMat a_full_nz = CMat(dim, r);
    for (int k = 0; k < r; ++k)
      a_full_nz.col(k) = apply_annihilation(es.eigenvectors().col(nz[k]), n, cutoff, mode);
    adag_in_basis = (es.eigenvectors().adjoint() * a_full_nz).adjoint();
    quad[2 * mode] = (a_in_basis + adag_in_basis) / std::sqrt(2.0);
    quad[2 * mode + 1] = (a_in_basis - adag_in_basis) * cplx(0.0, -1.0) / std::sqrt(2.0);
  }

  Mat weights = Mat::Zero(r, dim);
  for (int k = 0; k < r; ++k) {
    for (Eigen::Index j = 0; j < dim; ++j) {
      const double li = lam(nz[k]);
      const double lj = lam(j) > 1e-12 ? lam(j) : 0.0;
      const double denom = li + lj;
      if (denom < 1e-14) continue;
      weights(k, j) = (li - lj) * (li - lj) / denom;
    }
  }

  Mat f(2 * n, 2 * n);
  for (int s = 0; s < 2 * n; ++s) {
    for (int t = s; t < 2 * n; ++t) {
      // Split the double sum into (nz,nz) and twice the (nz, zero) part.
      cplx total = 0.0;
      for (int k = 0; k < r; ++k) {
        for (Eigen::Index j = 0; j < dim; ++j) {
          if (weights(k, j) == 0.0) continue;
          const cplx term = weights(k, j) * quad[s](k, j) * std::conj(quad[t](k, j));
          const bool j_is_nz = lam(j) > 1e-12;
          total += j_is_nz ? term : (term + std::conj(term));
        }
      }
      f(s, t) = f(t, s) = 0.5 * total.real();
    }
  }
  return f;
}

// ---------------------------------------------------------------------------
// Measurement
// ---------------------------------------------------------------------------

namespace {

std::vector<int> complement_modes(int n_modes, const std::vector<int>& modes) {
  std::vector<bool> taken(n_modes, false);
  for (int m : modes) {
    require(m >= 0 && m < n_modes, "mode index out of range");
    require(!taken[m], "duplicate mode index");
    taken[m] = true;
  }
  std::vector<int> rest;
  for (int m = 0; m < n_modes; ++m)
    if (!taken[m]) rest.push_back(m);
  return rest;
}

// Flat index from levels on `modes` plus levels on the complement.
Eigen::Index compose_index(int n_modes, int cutoff, const std::vector<int>& modes,
                           const std::vector<int>& mode_levels, const std::vector<int>& rest,
                           const std::vector<int>& rest_levels) {
  std::vector<int> levels(n_modes, 0);
  for (std::size_t k = 0; k < modes.size(); ++k) levels[modes[k]] = mode_levels[k];
  for (std::size_t k = 0; k < rest.size(); ++k) levels[rest[k]] = rest_levels[k];
  Eigen::Index idx = 0;
  for (int m = 0; m < n_modes; ++m) idx = idx * cutoff + levels[m];
  return idx;
}

bool advance_levels(std::vector<int>& levels, int cutoff) {
  for (int k = static_cast<int>(levels.size()) - 1; k >= 0; --k) {
    if (++levels[k] < cutoff) return true;
    levels[k] = 0;
  }
  return false;
}

}  // namespace

std::vector<CountOutcome> measure_photon_number(const FockState& state,
                                                const std::vector<int>& modes) {
  require(!modes.empty(), "measure_photon_number: mode subset must be nonempty");
  const int n = n_modes_of(state);
  const int cutoff = cutoff_of(state);
  const std::vector<int> rest = complement_modes(n, modes);
  const Eigen::Index rest_dim = ipow(cutoff, static_cast<int>(rest.size()));

  std::vector<CountOutcome> outcomes;
  std::vector<int> counts(modes.size(), 0);
  do {
    CountOutcome oc;
    oc.counts = counts;
    if (std::holds_alternative<FockPure>(state)) {
      const FockPure& psi = std::get<FockPure>(state);
      CVec slice(rest_dim);
      std::vector<int> rest_levels(rest.size(), 0);
      Eigen::Index pos = 0;
      do {
        slice(pos++) = psi.amplitudes()(compose_index(n, cutoff, modes, counts, rest, rest_levels));
      } while (advance_levels(rest_levels, cutoff) && pos < rest_dim);
      oc.probability = slice.squaredNorm();
      if (oc.probability > 1e-14 && !rest.empty()) {
        slice /= slice.norm();
        fix_global_phase(slice);
        oc.post = FockPure(static_cast<int>(rest.size()), cutoff, std::move(slice));
      }
    } else {
      const FockDensity& rho = std::get<FockDensity>(state);
      CMat block(rest_dim, rest_dim);
      std::vector<int> row_levels(rest.size(), 0);
      Eigen::Index rpos = 0;
      do {
        const Eigen::Index ridx = compose_index(n, cutoff, modes, counts, rest, row_levels);
        std::vector<int> col_levels(rest.size(), 0);
        Eigen::Index cpos = 0;
        do {
          block(rpos, cpos++) =
              rho.matrix()(ridx, compose_index(n, cutoff, modes, counts, rest, col_levels));
        } while (advance_levels(col_levels, cutoff) && cpos < rest_dim);
        ++rpos;
      } while (advance_levels(row_levels, cutoff) && rpos < rest_dim);
      oc.probability = block.trace().real();
      if (oc.probability > 1e-14 && !rest.empty())
        oc.post = FockDensity(static_cast<int>(rest.size()), cutoff, block / oc.probability);
    }
    outcomes.push_back(std::move(oc));
  } while (advance_levels(counts, cutoff));
  return outcomes;
}

ProjectionResult project_onto(const FockState& state, int mode, const ProjectionTarget& target) {
  const int n = n_modes_of(state);
  const int cutoff = cutoff_of(state);
  require(mode >= 0 && mode < n, "project_onto: mode index out of range");

  CVec t;
  switch (target.kind) {
    case ProjectionTarget::Kind::vacuum:
      t = CVec::Zero(cutoff);
      t(0) = 1.0;
      break;
    case ProjectionTarget::Kind::coherent:
      t = coherent_column(target.alpha, cutoff);
      break;
    case ProjectionTarget::Kind::fock:
      require(target.level >= 0 && target.level < cutoff,
              "project_onto: fock level must be below the cutoff");
      t = CVec::Zero(cutoff);
      t(target.level) = 1.0;
      break;
  }

  const std::vector<int> modes{mode};
  const std::vector<int> rest = complement_modes(n, modes);
  const Eigen::Index rest_dim = ipow(cutoff, static_cast<int>(rest.size()));

  ProjectionResult result{0.0, std::nullopt};
  if (std::holds_alternative<FockPure>(state)) {
    const FockPure& psi = std::get<FockPure>(state);
    CVec reduced = CVec::Zero(std::max<Eigen::Index>(rest_dim, 1));
    std::vector<int> rest_levels(rest.size(), 0);
    Eigen::Index pos = 0;
    do {
      cplx acc = 0.0;
      for (int l = 0; l < cutoff; ++l)
        acc += std::conj(t(l)) * psi.amplitudes()(compose_index(n, cutoff, modes, {l}, rest, rest_levels));
      reduced(pos++) = acc;
    } while (advance_levels(rest_levels, cutoff) && pos < rest_dim);
    result.probability = reduced.squaredNorm();
    if (result.probability > 1e-14 && !rest.empty()) {
      reduced /= reduced.norm();
      fix_global_phase(reduced);
      result.post = FockPure(static_cast<int>(rest.size()), cutoff, std::move(reduced));
    }
  } else {
    const FockDensity& rho = std::get<FockDensity>(state);
    CMat reduced = CMat::Zero(std::max<Eigen::Index>(rest_dim, 1), std::max<Eigen::Index>(rest_dim, 1));
    std::vector<int> row_levels(rest.size(), 0);
    Eigen::Index rpos = 0;
    do {
      std::vector<int> col_levels(rest.size(), 0);
      Eigen::Index cpos = 0;
      do {
        cplx acc = 0.0;
        for (int lr = 0; lr < cutoff; ++lr)
          for (int lc = 0; lc < cutoff; ++lc)
            acc += std::conj(t(lr)) * t(lc) *
                   rho.matrix()(compose_index(n, cutoff, modes, {lr}, rest, row_levels),
                                compose_index(n, cutoff, modes, {lc}, rest, col_levels));
        reduced(rpos, cpos++) = acc;
      } while (advance_levels(col_levels, cutoff) && cpos < rest_dim);
      ++rpos;
    } while (advance_levels(row_levels, cutoff) && rpos < rest_dim);
    result.probability = reduced.trace().real();
    if (result.probability > 1e-14 && !rest.empty())
      result.post = FockDensity(static_cast<int>(rest.size()), cutoff, reduced / result.probability);
  }
  return result;
}

FockDensity partial_trace(const FockDensity& rho, const std::vector<int>& modes_to_trace) {
  require(!modes_to_trace.empty(), "partial_trace: mode subset must be nonempty");
  const int n = rho.n_modes();
  const int cutoff = rho.cutoff();
  const std::vector<int> rest = complement_modes(n, modes_to_trace);
  require(!rest.empty(), "partial_trace: cannot trace out every mode");
  const Eigen::Index rest_dim = ipow(cutoff, static_cast<int>(rest.size()));

  CMat out = CMat::Zero(rest_dim, rest_dim);
  std::vector<int> traced(modes_to_trace.size(), 0);
  do {
    std::vector<int> row_levels(rest.size(), 0);
    Eigen::Index rpos = 0;
    do {
      const Eigen::Index ridx = compose_index(n, cutoff, modes_to_trace, traced, rest, row_levels);
      std::vector<int> col_levels(rest.size(), 0);
      Eigen::Index cpos = 0;
      do {
        out(rpos, cpos++) +=
            rho.matrix()(ridx, compose_index(n, cutoff, modes_to_trace, traced, rest, col_levels));
      } while (advance_levels(col_levels, cutoff) && cpos < rest_dim);
      ++rpos;
    } while (advance_levels(row_levels, cutoff) && rpos < rest_dim);
  } while (advance_levels(traced, cutoff));
  return FockDensity(static_cast<int>(rest.size()), cutoff, std::move(out));
}

}  // namespace cvnc
