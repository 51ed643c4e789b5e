#include "cvnc/selftest.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "cvnc/fock.hpp"
#include "cvnc/gaussian.hpp"
#include "cvnc/monotones.hpp"
#include "cvnc/protocols.hpp"
#include "cvnc/symplectic.hpp"

namespace cvnc {

namespace {

using Rng = std::mt19937_64;

struct Check {
  bool ok = true;
  std::ostringstream details;

  void expect(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      details << "FAILED: " << what << "; ";
    }
  }
};

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(6);
  os << x;
  return os.str();
}

FockPure random_capped_pure(Rng& rng, int n_modes, int cutoff, int max_total) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  const Eigen::Index dim = static_cast<Eigen::Index>(std::pow(cutoff, n_modes));
  CVec amp = CVec::Zero(dim);
  for (Eigen::Index idx = 0; idx < dim; ++idx) {
    int total = 0;
    Eigen::Index rest = idx;
    for (int m = 0; m < n_modes; ++m) {
      total += static_cast<int>(rest % cutoff);
      rest /= cutoff;
    }
    if (total <= max_total) amp(idx) = cplx(gauss(rng), gauss(rng));
  }
  amp /= amp.norm();
  return FockPure(n_modes, cutoff, amp);
}

FockDensity squeezed_thermal(double s, double d, int cutoff) {
  CMat sq = squeeze_operator(-0.5 * std::log(s), cutoff);
  FockDensity th = thermal_state(d, cutoff);
  return FockDensity(1, cutoff, CMat(sq * th.matrix() * sq.adjoint()));
}

// --------------------------------------------------------------------------
// 1. Thermal-minus-vacuum closed form
// --------------------------------------------------------------------------
CriterionResult criterion_thermal_minus_vacuum(Rng&) {
  Check c;
  for (double p : {0.2, 0.4, 0.5, 0.6, 0.9}) {
    const int precondition_cutoff =
        static_cast<int>(std::ceil(std::log(1e-12) / std::log(p))) + 2;
    const int cutoff = std::max(60, precondition_cutoff);
    Mat f = qfi_matrix(thermal_minus_vacuum(p, cutoff));
    const double expected = 1.5 * (1.0 - p) / (1.0 + p);
    c.expect(std::abs(f(0, 0) - expected) <= 1e-6,
             "F(rho,x) at p=" + fmt(p) + " is " + fmt(f(0, 0)) + ", expected " + fmt(expected));
    if (p > 0.5) {
      Vec fs = f_spectrum(f);
      c.expect(fs(0) == 0.0, "f1 at p=" + fmt(p) + " is " + fmt(fs(0)) + ", expected exactly 0");
    }
  }
  return {"thermal_minus_vacuum_qfi", c.ok, c.ok ? "F=(3/2)(1-p)/(1+p) within 1e-6; f1=0 for p>1/2"
                                               : c.details.str()};
}

// --------------------------------------------------------------------------
// 2. Pure-state equality F = V
// --------------------------------------------------------------------------
CriterionResult criterion_pure_equality(Rng& rng) {
  Check c;
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const int n_modes = 1 + trial % 2;
    const int cutoff = n_modes == 1 ? 16 : 10;
    FockPure psi = random_capped_pure(rng, n_modes, cutoff, cutoff - 1);
    Mat f = qfi_matrix(FockDensity(psi));
    Mat v = quadrature_moments(psi).cov;
    worst = std::max(worst, (f - v).cwiseAbs().maxCoeff());
  }
  c.expect(worst <= 1e-7, "max |F - V| = " + fmt(worst));
  return {"pure_state_qfi_equals_variance", c.ok,
          c.ok ? "200 random pure states, max |F - V| = " + fmt(worst) : c.details.str()};
}

// --------------------------------------------------------------------------
// 3. Gaussian QFI formula
// --------------------------------------------------------------------------
CriterionResult criterion_gaussian_qfi(Rng& rng) {
  Check c;
  std::uniform_real_distribution<double> s_dist(1.0, 3.0), d_dist(0.5, 1.5);
  double worst = 0.0;
  for (int trial = 0; trial < 12; ++trial) {
    const double s = trial == 0 ? 3.0 : s_dist(rng);
    const double d = trial == 0 ? 1.5 : d_dist(rng);
    FockDensity rho = squeezed_thermal(s, d, 80);
    Mat v = Mat::Zero(2, 2);
    v(0, 0) = d * s;
    v(1, 1) = d / s;
    Mat f_fock = qfi_matrix(rho);
    Mat f_gauss = gaussian_qfi(v);
    worst = std::max(worst, (f_fock - f_gauss).cwiseAbs().maxCoeff());
  }
  c.expect(worst <= 1e-4, "max |F_fock - OmegaV^-1Omega^T/4| = " + fmt(worst));
  return {"gaussian_qfi_formula", c.ok,
          c.ok ? "squeezed-thermal s<=3, d<=1.5, cutoff 80: max deviation " + fmt(worst)
               : c.details.str()};
}

// --------------------------------------------------------------------------
// 4. Cat growth
// --------------------------------------------------------------------------
CriterionResult criterion_cat_growth(Rng&) {
  Check c;
  CatGrowthReport report = cat_growth_protocol(cplx(2.0, 0.0), 48);
  c.expect(std::abs(report.p_success - 0.5) <= 2e-2,
           "p_success = " + fmt(report.p_success));
  const double ratio = report.w1_after / report.w1_before;
  c.expect(std::abs(ratio - 2.0) <= 2e-2, "W1 ratio = " + fmt(ratio));
  FockPure target = cat_state(cplx(2.0 * std::sqrt(2.0), 0.0), 1, 48);
  const double fid = std::norm(target.amplitudes().dot(report.output.amplitudes()));
  c.expect(fid >= 0.999, "fidelity to cat(2*sqrt(2)) = " + fmt(fid));
  c.expect(report.slack >= -1e-9, "concentration bound slack = " + fmt(report.slack));
  return {"cat_growth_concentration", c.ok,
          c.ok ? "p=" + fmt(report.p_success) + ", ratio=" + fmt(ratio) + ", fidelity=" + fmt(fid) +
                     ", slack=" + fmt(report.slack)
               : c.details.str()};
}

// --------------------------------------------------------------------------
// 5. N3 invariance of homodyne feed-forward
// --------------------------------------------------------------------------
CriterionResult criterion_n3_invariance(Rng& rng) {
  Check c;
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  double worst_n3 = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const double vm = 0.05 + 0.449 * uni(rng);  // v- < 1/2
    const double vp = std::max(0.25 / vm, vm) + 3.0 * uni(rng);
    const double eta = 0.999 * uni(rng);
    HomodyneFeedforwardResult r = homodyne_feedforward(vp, vm, eta);
    const double n3_in = (0.5 - vm) / (2.0 - 1.0 / vp);
    const double n3_out = (0.5 - r.v_minus) / (2.0 - 1.0 / r.v_plus);
    worst_n3 = std::max(worst_n3, std::abs(n3_out - n3_in));
  }
  c.expect(worst_n3 <= 1e-10, "max |N3' - N3| = " + fmt(worst_n3));

  double worst_schur = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const double vm = 0.05 + 0.449 * uni(rng);
    const double vp = std::max(0.25 / vm, vm) + 3.0 * uni(rng);
    const double eta = 0.01 + 0.98 * uni(rng);
    Mat vs = Mat::Zero(2, 2);
    vs(0, 0) = vp;
    vs(1, 1) = vm;
    Mat va = 0.5 * Mat::Identity(2, 2);
    Mat a = (1.0 - eta) * vs + eta * va;
    Mat b = eta * vs + (1.0 - eta) * va;
    Mat cc = std::sqrt(eta * (1.0 - eta)) * (vs - va);
    Mat z = Mat::Zero(2, 2);
    z(0, 0) = 0.5e-8;
    z(1, 1) = 0.5e8;
    Mat cond = condition_on_gaussian_measurement(a, b, cc, z);
    HomodyneFeedforwardResult r = homodyne_feedforward(vp, vm, eta);
    worst_schur = std::max({worst_schur, std::abs(cond(0, 0) - r.v_plus),
                            std::abs(cond(1, 1) - r.v_minus)});
  }
  c.expect(worst_schur <= 1e-6, "max Schur-limit deviation = " + fmt(worst_schur));
  return {"homodyne_n3_invariance", c.ok,
          c.ok ? "1000 draws: max |N3'-N3| = " + fmt(worst_n3) +
                     "; Schur z=1e8 limit matches within " + fmt(worst_schur)
               : c.details.str()};
}

// --------------------------------------------------------------------------
// 6. Single-mode conversion verdicts vs brute-force reachability
// --------------------------------------------------------------------------
namespace {

double best_region_margin(double vp, double vm, double tp, double tm) {
  // max over classical ancillas of the fixed-ancilla membership margin,
  // log-spaced grid followed by local pattern refinement
  auto margin_at = [&](double yp, double ym) {
    return p0_achievable_region(vp, vm, yp, std::min(ym, yp), tp, tm, 1e-9).margin;
  };
  auto sweep = [&](double y_cap, double& best_yp, double& best_ym) {
    double best = -1e9;
    for (int i = 0; i <= 400; ++i) {
      const double yp = 0.5 + (std::pow(1.08, i) - 1.0);
      if (yp > y_cap) break;
      for (int j = 0; j <= 20; ++j) {
        const double ym = 0.5 + (yp - 0.5) * j / 20.0;
        const double m = margin_at(yp, ym);
        if (m > best) {
          best = m;
          best_yp = yp;
          best_ym = ym;
        }
      }
    }
    return best;
  };

  double best_yp = 0.5, best_ym = 0.5;
  double best = sweep(50.0, best_yp, best_ym);
  double y_cap = 50.0;
  if (best < 0.0) {
    // Near the v- floor the certifying ancilla grows without bound; refine
    // with an extended search before declaring the point unreachable.
    y_cap = 1e12;
    best = std::max(best, sweep(y_cap, best_yp, best_ym));
  }

  double step_p = 0.2 * best_yp, step_m = 0.5;
  for (int it = 0; it < 120; ++it) {
    bool improved = false;
    for (double dyp : {-step_p, 0.0, step_p}) {
      for (double dym : {-step_m, 0.0, step_m}) {
        const double yp = std::clamp(best_yp + dyp, 0.5, y_cap);
        const double ym = std::clamp(best_ym + dym, 0.5, yp);
        const double m = margin_at(yp, ym);
        if (m > best + 1e-16) {
          best = m;
          best_yp = yp;
          best_ym = ym;
          improved = true;
        }
      }
    }
    if (!improved) {
      step_p *= 0.6;
      step_m *= 0.6;
    }
  }
  return best;
}

}  // namespace

CriterionResult criterion_conversion_oracle(Rng& rng) {
  Check c;
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  int disagreements = 0, compared = 0, skipped_band = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const double vm = 0.08 + 0.9 * uni(rng);
    const double vp = std::max(0.25 / vm, vm) + 2.5 * uni(rng);
    const double tm = 0.08 + 0.9 * uni(rng);
    const double tp = std::max(0.25 / tm, tm) + 2.5 * uni(rng);

    Mat source = Mat::Zero(2, 2), target = Mat::Zero(2, 2);
    source(0, 0) = vp;
    source(1, 1) = vm;
    target(0, 0) = tp;
    target(1, 1) = tm;
    NMeasures ms = n_measures(source), mt = n_measures(target);

    // 1e-6 decision band around the verdict boundary
    if (std::abs(mt.n1 - ms.n1) <= 1e-6 || std::abs(mt.n2 - ms.n2) <= 1e-6) {
      ++skipped_band;
      continue;
    }
    const bool verdict = convertible(GaussianState::from_cov(source), GaussianState::from_cov(target),
                                  Regime::p0)
                          .feasible;
    const bool oracle = best_region_margin(vp, vm, tp, tm) >= -1e-8;
    ++compared;
    if (verdict != oracle) ++disagreements;
  }
  c.expect(disagreements == 0, std::to_string(disagreements) + " disagreements out of " +
                                    std::to_string(compared));
  return {"single_mode_conversion_oracle", c.ok,
          c.ok ? std::to_string(compared) + " pairs compared (" + std::to_string(skipped_band) +
                     " in the boundary band), zero disagreements"
               : c.details.str()};
}

// --------------------------------------------------------------------------
// 7. Monotonicity property suites
// --------------------------------------------------------------------------
CMat random_unitary_matrix(Rng& rng, int n) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  CMat a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = cplx(gauss(rng), gauss(rng));
  Eigen::HouseholderQR<CMat> qr(a);
  CMat q = qr.householderQ();
  CMat r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int i = 0; i < n; ++i) q.col(i) *= r(i, i) / std::abs(r(i, i));
  return q;
}

CriterionResult criterion_monotonicity_suites(Rng& rng) {
  Check c;
  std::uniform_real_distribution<double> uni(0.0, 1.0);

  // P1: 500 random single-measurement (occasionally two-round) protocols on
  // pure non-Gaussian inputs; V and W partial sums may never grow.
  int p1_violations = 0;
  double p1_worst = 1e9;
  for (int trial = 0; trial < 500; ++trial) {
    const int n_sys = 1 + trial % 2;
    const int n_anc = n_sys == 1 ? 1 + static_cast<int>(rng() % 2) : 1;
    const int n_tot = n_sys + n_anc;
    const int cutoff = 12;
    FockPure input = random_capped_pure(rng, n_sys, cutoff, 6);

    ProtocolStep step;
    for (int a = 0; a < n_anc; ++a)
      step.ancillas.push_back(cplx(0.3 * (uni(rng) - 0.5), 0.3 * (uni(rng) - 0.5)));
    step.unitary = random_unitary_matrix(rng, n_tot);
    // keep outputs >= ancillas so the step-size invariant holds
    const int n_meas_max = std::max(1, std::min(n_tot - n_anc, n_tot - 1));
    const int n_meas = 1 + static_cast<int>(rng() % n_meas_max);
    Measurement meas;
    meas.kind = MeasurementKind::photon_count;
    for (int m = 0; m < n_meas; ++m) meas.modes.push_back(m);  // first modes; U is random
    step.measurement = std::move(meas);

    if (trial % 5 == 0 && n_tot - n_meas >= 2) {
      auto second = std::make_shared<ProtocolStep>();
      second->unitary = random_unitary_matrix(rng, n_tot - n_meas);
      second->measurement = Measurement{{0}, MeasurementKind::photon_count, {}};
      step.next = second;
    }

    for (MonotoneFamily family : {MonotoneFamily::v, MonotoneFamily::w}) {
      MonotonicityReport report = check_monotonicity(FockState(input), step, family, 1e-8);
      if (!report.all_ok) ++p1_violations;
      for (const auto& b : report.branches)
        if (!b.skipped_mixed) p1_worst = std::min(p1_worst, b.worst_margin);
    }
  }
  c.expect(p1_violations == 0,
           std::to_string(p1_violations) + " P1 violations, worst margin " + fmt(p1_worst));

  // P0: 200 random measurement-free protocols on mixed inputs; every f_i and
  // g_i is nonincreasing.
  int p0_violations = 0;
  double p0_worst = 1e9;
  for (int trial = 0; trial < 200; ++trial) {
    const int n_sys = 1 + trial % 2;
    const int cutoff = n_sys == 1 ? 10 : 6;
    const int cap = n_sys == 1 ? 5 : 2;

    CMat mix = CMat::Zero(static_cast<Eigen::Index>(std::pow(cutoff, n_sys)),
                          static_cast<Eigen::Index>(std::pow(cutoff, n_sys)));
    double weights[3] = {0.5, 0.3, 0.2};
    for (double w : weights) {
      FockPure part = random_capped_pure(rng, n_sys, cutoff, cap);
      mix += w * (part.amplitudes() * part.amplitudes().adjoint());
    }
    FockDensity input(n_sys, cutoff, std::move(mix));

    ProtocolStep step;
    step.ancillas = {trial % 4 == 0 ? cplx(0.05, -0.05) : cplx(0.0, 0.0)};
    step.unitary = random_unitary_matrix(rng, n_sys + 1);
    const int n_trace = 1 + static_cast<int>(rng() % n_sys);
    for (int t = 0; t < n_trace; ++t) step.trace_out.push_back(t);

    for (MonotoneFamily family : {MonotoneFamily::f, MonotoneFamily::g}) {
      MonotonicityReport report = check_monotonicity(FockState(input), step, family, 1e-8);
      if (!report.all_ok) ++p0_violations;
      if (report.eigenwise_evaluated) p0_worst = std::min(p0_worst, report.eigenwise_margin);
    }
  }
  c.expect(p0_violations == 0,
           std::to_string(p0_violations) + " P0 violations, worst eigenwise margin " + fmt(p0_worst));

  return {"monotonicity_property_suites", c.ok,
          c.ok ? "500 P1 + 200 P0 protocols, zero violations (worst P1 margin " + fmt(p1_worst) +
                     ", worst P0 eigenwise margin " + fmt(p0_worst) + ")"
               : c.details.str()};
}

// --------------------------------------------------------------------------
// 8. Coherent-map contraction fits
// --------------------------------------------------------------------------
CriterionResult criterion_kraus_fits(Rng& rng) {
  Check c;

  ProtocolStep loss;
  loss.ancillas = {cplx(0.0, 0.0)};
  loss.unitary = beam_splitter_unitary(0.3, 0, 1, 2);
  loss.trace_out = {1};

  ProtocolStep subtract;
  subtract.ancillas = {cplx(0.0, 0.0)};
  subtract.unitary = beam_splitter_unitary(0.01, 0, 1, 2);
  subtract.measurement = Measurement{{1}, MeasurementKind::photon_count, {}};

  ProtocolStep catgrow;
  catgrow.unitary = beam_splitter_unitary(0.5, 0, 1, 2);
  catgrow.measurement = Measurement{{0}, MeasurementKind::vacuum_projection, {}};

  struct Entry {
    const char* name;
    const ProtocolStep* step;
    int n_in;
  };
  for (const Entry& entry :
       {Entry{"loss", &loss, 1}, Entry{"photon-subtract", &subtract, 1}, Entry{"catgrow", &catgrow, 2}}) {
    auto fits = verify_kraus_contraction(*entry.step, entry.n_in, 22, 8, 1.0,
                                         1e-6, static_cast<unsigned>(rng()));
    int applicable = 0;
    for (const KrausFit& fit : fits) {
      if (!fit.applicable) continue;
      ++applicable;
      c.expect(fit.residual <= 1e-6, std::string(entry.name) + ": residual " + fmt(fit.residual));
      c.expect(fit.max_singular_value <= 1.0 + 1e-6,
               std::string(entry.name) + ": sigma_max " + fmt(fit.max_singular_value));
    }
    c.expect(applicable >= 1, std::string(entry.name) + ": no applicable branch fits");
  }

  // injected amplifier oracle |alpha> -> |1.5 alpha|
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  std::vector<std::pair<CVec, CVec>> samples;
  for (int s = 0; s < 10; ++s) {
    CVec in(1);
    in(0) = cplx(uni(rng), uni(rng));
    samples.push_back({in, 1.5 * in});
  }
  KrausFit amp = fit_coherent_map(samples);
  c.expect(amp.max_singular_value >= 1.49, "amplifier sigma_max = " + fmt(amp.max_singular_value));

  return {"kraus_contraction_fits", c.ok,
          c.ok ? "built-in protocol branches contract (sigma_max <= 1+1e-6); amplifier flagged at "
                 "sigma_max = " + fmt(amp.max_singular_value)
               : c.details.str()};
}

// --------------------------------------------------------------------------
// 9. Number-superposition variance exactness and the faithfulness bound
// --------------------------------------------------------------------------
CriterionResult criterion_variance_exactness(Rng& rng) {
  Check c;
  for (auto [eps, level] : {std::pair<double, int>{0.1, 4}, {0.01, 10}}) {
    FockPure psi = fock_superposition(
        {{0, std::sqrt(1.0 - eps)}, {level, std::sqrt(eps)}}, level + 2);
    Mat v = quadrature_moments(psi).cov;
    c.expect(std::abs(v(0, 0) - (0.5 + eps * level)) <= 1e-10,
             "V(x) at (eps=" + fmt(eps) + ", l=" + std::to_string(level) + ") = " + fmt(v(0, 0)));
  }

  int bound_failures = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const int n_modes = 1 + trial % 2;
    const int cutoff = n_modes == 1 ? 20 : 12;
    FockPure psi = random_capped_pure(rng, n_modes, cutoff, 5);
    // center the first moments
    Vec mean = quadrature_moments(psi).mean;
    std::vector<cplx> shift(n_modes);
    for (int m = 0; m < n_modes; ++m)
      shift[m] = -cplx(mean(2 * m), mean(2 * m + 1)) / std::sqrt(2.0);
    psi = apply_displacement(psi, shift, 1e-3);
    if (!overlap_bound_check(psi).holds) ++bound_failures;
  }
  c.expect(bound_failures == 0, std::to_string(bound_failures) + " trace-distance bound failures");
  return {"variance_exactness_and_faithfulness", c.ok,
          c.ok ? "V(x) = 1/2 + eps*l to 1e-10; trace-distance bound held on 200 centered states"
               : c.details.str()};
}

// --------------------------------------------------------------------------
// 10. Spectral structure invariants
// --------------------------------------------------------------------------
Mat random_orthosymplectic_matrix(Rng& rng, int n_modes) {
  return mode_unitary_to_orthosymplectic(random_unitary_matrix(rng, n_modes));
}

Mat random_covariance_matrix(Rng& rng, int n_modes) {
  std::uniform_real_distribution<double> sq(-1.0, 1.0), th(0.5, 2.0);
  Vec z(2 * n_modes), d(2 * n_modes);
  for (int i = 0; i < n_modes; ++i) {
    const double r = sq(rng);
    z(2 * i) = std::exp(r);
    z(2 * i + 1) = std::exp(-r);
    d(2 * i) = d(2 * i + 1) = th(rng);
  }
  Mat r1 = random_orthosymplectic_matrix(rng, n_modes);
  Mat r2 = random_orthosymplectic_matrix(rng, n_modes);
  Mat core = r2 * d.asDiagonal() * r2.transpose();
  Mat v = r1 * z.asDiagonal() * core * z.asDiagonal() * r1.transpose();
  return 0.5 * (v + v.transpose());
}

Vec merge_descending(const Vec& a, const Vec& b) {
  std::vector<double> all(a.data(), a.data() + a.size());
  all.insert(all.end(), b.data(), b.data() + b.size());
  std::sort(all.rbegin(), all.rend());
  return Eigen::Map<Vec>(all.data(), all.size());
}

CriterionResult criterion_spectral_invariants(Rng& rng) {
  Check c;
  double worst_invariance = 0.0, worst_chain = 0.0, worst_identity = 0.0, worst_additivity = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + trial % 3;
    Mat v = random_covariance_matrix(rng, n);
    Mat r = random_orthosymplectic_matrix(rng, n);
    Mat v_rot = r * v * r.transpose();
    Mat f = gaussian_qfi(v);
    Mat f_rot = gaussian_qfi(v_rot);

    worst_invariance = std::max(
        {worst_invariance, (v_spectrum(v) - v_spectrum(v_rot)).cwiseAbs().maxCoeff(),
         (w_spectrum(v) - w_spectrum(v_rot)).cwiseAbs().maxCoeff(),
         (f_spectrum(f) - f_spectrum(f_rot)).cwiseAbs().maxCoeff(),
         (g_spectrum(f) - g_spectrum(f_rot)).cwiseAbs().maxCoeff()});

    // additivity under direct sums
    if (n <= 2) {
      Mat v2 = random_covariance_matrix(rng, 1);
      Mat joint = direct_sum(v, v2);
      worst_additivity = std::max(
          {worst_additivity,
           (v_spectrum(joint) - merge_descending(v_spectrum(v), v_spectrum(v2))).cwiseAbs().maxCoeff(),
           (w_spectrum(joint) - merge_descending(w_spectrum(v), w_spectrum(v2))).cwiseAbs().maxCoeff()});
    }

    // W_k <= V_2k and W_n = V_2n
    Vec vs = v_spectrum(v);
    Vec ws = w_spectrum(v);
    for (int k = 1; k <= n; ++k)
      worst_chain = std::max(worst_chain, partial_sum(ws, k) - partial_sum(vs, 2 * k));
    worst_identity = std::max(worst_identity,
                              std::abs(partial_sum(ws, n) - partial_sum(vs, 2 * n)));
  }
  c.expect(worst_invariance <= 1e-9, "conjugation invariance deviation " + fmt(worst_invariance));
  c.expect(worst_additivity <= 1e-10, "additivity deviation " + fmt(worst_additivity));
  c.expect(worst_chain <= 1e-10, "W_k <= V_2k violated by " + fmt(worst_chain));
  c.expect(worst_identity <= 1e-10, "|W_n - V_2n| = " + fmt(worst_identity));
  return {"spectral_structure_invariants", c.ok,
          c.ok ? "invariance " + fmt(worst_invariance) + ", additivity " + fmt(worst_additivity) +
                     ", chain slack " + fmt(worst_chain) + ", |W_n - V_2n| " + fmt(worst_identity)
               : c.details.str()};
}

}  // namespace

std::vector<CriterionResult> run_acceptance_suite(unsigned long long seed, const std::string& only) {
  struct Entry {
    const char* name;
    CriterionResult (*fn)(Rng&);
  };
  const Entry entries[] = {
      {"thermal_minus_vacuum_qfi", criterion_thermal_minus_vacuum},
      {"pure_state_qfi_equals_variance", criterion_pure_equality},
      {"gaussian_qfi_formula", criterion_gaussian_qfi},
      {"cat_growth_concentration", criterion_cat_growth},
      {"homodyne_n3_invariance", criterion_n3_invariance},
      {"single_mode_conversion_oracle", criterion_conversion_oracle},
      {"monotonicity_property_suites", criterion_monotonicity_suites},
      {"kraus_contraction_fits", criterion_kraus_fits},
      {"variance_exactness_and_faithfulness", criterion_variance_exactness},
      {"spectral_structure_invariants", criterion_spectral_invariants},
  };

  std::vector<CriterionResult> results;
  unsigned long long index = 0;
  for (const Entry& entry : entries) {
    ++index;
    if (!only.empty() && std::string(entry.name).find(only) == std::string::npos) continue;
    Rng rng(seed * 1000003ULL + index);
    results.push_back(entry.fn(rng));
  }
  return results;
}

}  // namespace cvnc
