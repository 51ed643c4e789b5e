#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <random>
#include <vector>

#include "cvnc/fock.hpp"
#include "cvnc/gaussian.hpp"
#include "cvnc/monotones.hpp"
#include "cvnc/symplectic.hpp"
#include "test_helpers.hpp"

using namespace cvnc;
using cvnc::testing::random_covariance;
using cvnc::testing::random_orthosymplectic;

namespace {

Mat squeezed_cov(double s) {
  Mat v = Mat::Zero(2, 2);
  v(0, 0) = 0.5 * s;
  v(1, 1) = 0.5 / s;
  return v;
}

Vec merged_sorted(const Vec& a, const Vec& b) {
  std::vector<double> all(a.data(), a.data() + a.size());
  all.insert(all.end(), b.data(), b.data() + b.size());
  std::sort(all.rbegin(), all.rend());
  return Eigen::Map<Vec>(all.data(), all.size());
}

}  // namespace

TEST_CASE("v spectrum") {
  Vec v = v_spectrum(0.5 * Mat::Identity(2, 2));
  CHECK(v.cwiseAbs().maxCoeff() <= 1e-15);

  v = v_spectrum(squeezed_cov(4.0));
  CHECK(v(0) == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(v(1) == doctest::Approx(-0.375).epsilon(1e-12));
  Vec sums = partial_sums(v);
  CHECK(sums(0) == doctest::Approx(1.5));
  CHECK(sums(1) == doctest::Approx(1.125));

  // additivity under direct sum
  Vec joint = v_spectrum(direct_sum(squeezed_cov(4.0), 0.5 * Mat::Identity(2, 2)));
  CHECK(joint(0) == doctest::Approx(1.5));
  CHECK(joint(1) == doctest::Approx(0.0));
  CHECK(joint(2) == doctest::Approx(0.0));
  CHECK(joint(3) == doctest::Approx(-0.375));

  Mat asym(2, 2);
  asym << 1, 1, 0, 1;
  CHECK_THROWS_AS(v_spectrum(asym), std::invalid_argument);
}

TEST_CASE("w spectrum") {
  Vec w = w_spectrum(0.5 * Mat::Identity(2, 2));
  CHECK(w.size() == 1);
  CHECK(std::abs(w(0)) <= 1e-15);

  w = w_spectrum(squeezed_cov(4.0));
  CHECK(w(0) == doctest::Approx((4.0 + 0.25) / 2.0 - 1.0).epsilon(1e-12));  // 1.125

  // single-mode identity W_1 = V_2
  CHECK(w(0) == doctest::Approx(partial_sum(v_spectrum(squeezed_cov(4.0)), 2)).epsilon(1e-12));
}

TEST_CASE("f and g spectra") {
  Mat f_vac = 0.5 * Mat::Identity(2, 2);
  CHECK(f_spectrum(f_vac).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(g_spectrum(f_vac).cwiseAbs().maxCoeff() <= 1e-12);

  // pure squeezed x coherent: F = V
  Mat f = direct_sum(squeezed_cov(4.0), 0.5 * Mat::Identity(2, 2));
  Vec fs = f_spectrum(f);
  CHECK(fs(0) == doctest::Approx(1.5));
  CHECK(fs(1) == doctest::Approx(0.0));
  CHECK(fs(3) == doctest::Approx(0.0));
  CHECK(partial_sum(fs, 1) == doctest::Approx(partial_sum(fs, 4)));

  Vec gs = g_spectrum(f);
  CHECK(gs.size() == 2);
  CHECK(gs(0) == doctest::Approx(1.125));
  CHECK(gs(1) == doctest::Approx(0.0));

  // classical Gaussian: all zero
  Mat thermal = 1.3 * Mat::Identity(4, 4);
  CHECK(f_spectrum(gaussian_qfi(thermal)).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(g_spectrum(gaussian_qfi(thermal)).cwiseAbs().maxCoeff() <= 1e-12);

  CHECK_THROWS_AS(f_spectrum(-Mat::Identity(2, 2)), std::invalid_argument);
}

TEST_CASE("spectra invariant under orthosymplectic conjugation") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 25; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 3);
    Mat v = random_covariance(rng, n);
    Mat r = random_orthosymplectic(rng, n);
    Mat v_rot = r * v * r.transpose();

    CHECK((v_spectrum(v) - v_spectrum(v_rot)).cwiseAbs().maxCoeff() <= 1e-9);
    CHECK((w_spectrum(v) - w_spectrum(v_rot)).cwiseAbs().maxCoeff() <= 1e-9);
    Mat f = gaussian_qfi(v);
    Mat f_rot = gaussian_qfi(v_rot);
    CHECK((f_spectrum(f) - f_spectrum(f_rot)).cwiseAbs().maxCoeff() <= 1e-9);
    CHECK((g_spectrum(f) - g_spectrum(f_rot)).cwiseAbs().maxCoeff() <= 1e-9);
  }
}

TEST_CASE("additivity and the W/V chain") {
  std::mt19937_64 rng(57);
  for (int trial = 0; trial < 25; ++trial) {
    const int na = 1 + static_cast<int>(rng() % 2);
    const int nb = 1 + static_cast<int>(rng() % 2);
    Mat va = random_covariance(rng, na);
    Mat vb = random_covariance(rng, nb);
    Mat joint = direct_sum(va, vb);

    CHECK((v_spectrum(joint) - merged_sorted(v_spectrum(va), v_spectrum(vb)))
              .cwiseAbs()
              .maxCoeff() <= 1e-10);
    CHECK((w_spectrum(joint) - merged_sorted(w_spectrum(va), w_spectrum(vb)))
              .cwiseAbs()
              .maxCoeff() <= 1e-10);

    // V_1 <= V_2 <= ...; W_k <= V_2k; W_n = V_2n
    const int n = na + nb;
    Vec v = v_spectrum(joint);
    Vec w = w_spectrum(joint);
    Vec vp = partial_sums(v);
    Vec wp = partial_sums(w);
    for (int k = 1; k <= n; ++k) CHECK(wp(k - 1) <= vp(2 * k - 1) + 1e-10);
    CHECK(std::abs(wp(n - 1) - vp(2 * n - 1)) <= 1e-10);
  }
}

TEST_CASE("vidal probability bound") {
  Vec s4 = v_spectrum(squeezed_cov(4.0));
  CHECK(vidal_probability_bound(s4, s4) == doctest::Approx(1.0));

  Vec s9 = v_spectrum(squeezed_cov(9.0));
  // min(1.5/4, 1.125/(32/9)) = 0.31640625
  CHECK(vidal_probability_bound(s4, s9) == doctest::Approx(0.31640625).epsilon(1e-12));

  Vec vac = v_spectrum(0.5 * Mat::Identity(2, 2));
  CHECK(vidal_probability_bound(s4, vac) == doctest::Approx(1.0));

  // k past the source dimension saturates at the full source sum
  Vec long_target = v_spectrum(direct_sum(squeezed_cov(2.0), squeezed_cov(2.0)));
  Vec short_source = v_spectrum(squeezed_cov(9.0));
  const double expected = std::min({short_source(0) / long_target(0),
                                    (short_source(0) + short_source(1)) /
                                        (long_target(0) + long_target(1))});
  CHECK(vidal_probability_bound(short_source, long_target) ==
        doctest::Approx(std::clamp(expected, 0.0, 1.0)));
}

TEST_CASE("overlap bound") {
  FockPure coh = coherent_state({cplx(0.8, -0.3)}, 25);
  OverlapBound b = overlap_bound_check(coh);
  CHECK(std::abs(b.lhs) <= 1e-8);
  CHECK(std::abs(b.rhs) <= 1e-7);
  CHECK(b.holds);

  FockPure eps_state = fock_superposition({{0, std::sqrt(0.9)}, {4, std::sqrt(0.1)}}, 12);
  b = overlap_bound_check(eps_state);
  CHECK(b.lhs == doctest::Approx(0.1).epsilon(1e-9));
  CHECK(b.rhs == doctest::Approx(0.4).epsilon(1e-9));
  CHECK(b.holds);

  FockPure cat = cat_state(cplx(2.0, 0.0), 1, 40);
  b = overlap_bound_check(cat);
  CHECK(b.holds);
  CHECK(b.rhs - b.lhs > 1.0);  // large slack
}

TEST_CASE("classical states have vanishing monotones") {
  // QFI spectra vanish on classical states, mixed or not
  FockPure coh1 = coherent_state({cplx(0.8, 0.2)}, 26);
  FockPure coh2 = coherent_state({cplx(-0.5, 0.6)}, 26);
  CMat mixture = 0.6 * (coh1.amplitudes() * coh1.amplitudes().adjoint()) +
                 0.4 * (coh2.amplitudes() * coh2.amplitudes().adjoint());
  Mat f = qfi_matrix(FockDensity(1, 26, mixture));
  CHECK(f_spectrum(f).cwiseAbs().maxCoeff() <= 1e-8);
  CHECK(g_spectrum(f).cwiseAbs().maxCoeff() <= 1e-8);

  Mat f_thermal = qfi_matrix(thermal_state(1.3, 40));
  CHECK(f_spectrum(f_thermal).cwiseAbs().maxCoeff() <= 1e-8);
  CHECK(g_spectrum(f_thermal).cwiseAbs().maxCoeff() <= 1e-8);

  // variance spectra vanish on the classical pure states (coherent)
  Mat v_coh = quadrature_moments(coh1).cov;
  CHECK(v_spectrum(v_coh).cwiseAbs().maxCoeff() <= 1e-8);
  CHECK(w_spectrum(v_coh).cwiseAbs().maxCoeff() <= 1e-8);
}
