#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "cvnc/gaussian.hpp"
#include "cvnc/monotones.hpp"
#include "cvnc/symplectic.hpp"
#include "test_helpers.hpp"

using namespace cvnc;
using cvnc::testing::random_covariance;

namespace {

Mat diag2(double a, double b) {
  Mat m = Mat::Zero(2, 2);
  m(0, 0) = a;
  m(1, 1) = b;
  return m;
}

GaussianState single_mode(double v_plus, double v_minus) {
  return GaussianState::from_cov(diag2(v_plus, v_minus));
}

}  // namespace

TEST_CASE("classicality of gaussian states") {
  CHECK(is_classical_gaussian(0.5 * Mat::Identity(2, 2)));
  CHECK_FALSE(is_classical_gaussian(diag2(2.0, 0.125)));
  CHECK(is_classical_gaussian(diag2(1.3, 1.3)));
  CHECK_THROWS_AS(is_classical_gaussian(diag2(0.1, 0.1)), std::invalid_argument);
}

TEST_CASE("gaussian qfi") {
  Mat f = gaussian_qfi(0.5 * Mat::Identity(2, 2));
  CHECK((f - 0.5 * Mat::Identity(2, 2)).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(positive_part(f - 0.5 * Mat::Identity(2, 2)).cwiseAbs().maxCoeff() <= 1e-12);

  // pure squeezed: F = V
  Mat v = diag2(2.0, 0.125);
  f = gaussian_qfi(v);
  CHECK((f - v).cwiseAbs().maxCoeff() <= 1e-12);

  f = gaussian_qfi(Mat::Identity(2, 2));
  CHECK((f - 0.25 * Mat::Identity(2, 2)).cwiseAbs().maxCoeff() <= 1e-12);

  CHECK_THROWS_AS(gaussian_qfi(Mat::Zero(2, 2)), std::invalid_argument);

  // pure-state equality on random pure covariances
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 3);
    Mat pure = random_covariance(rng, n, 1.0, 0.5000001);
    CHECK((gaussian_qfi(pure) - pure).cwiseAbs().maxCoeff() <= 1e-6);
  }
}

TEST_CASE("n measures") {
  NMeasures m = n_measures(diag2(1.0, 0.3));
  CHECK(m.n1 == doctest::Approx(0.4).epsilon(1e-12));
  CHECK(m.n2 == doctest::Approx(0.4).epsilon(1e-12));
  CHECK(m.n3 == doctest::Approx(0.4).epsilon(1e-12));

  m = n_measures(0.5 * Mat::Identity(2, 2));
  CHECK(m.n1 == 0.0);
  CHECK(m.n2 == 0.0);
  CHECK(m.n3 == 0.0);

  // pure squeezed states sit on N3 = 1/2
  for (double s : {1.5, 2.0, 4.0, 9.0}) {
    m = n_measures(diag2(0.5 * s, 0.5 / s));
    CHECK(m.n3 == doctest::Approx(0.5).epsilon(1e-12));
  }

  CHECK_THROWS_AS(n_measures(Mat::Identity(4, 4)), std::invalid_argument);
}

TEST_CASE("single-mode conversion verdicts") {
  GaussianState rho = single_mode(1.0, 0.3);
  GaussianState sigma = single_mode(0.8, 0.35);

  ConversionVerdict p0 = convertible(rho, sigma, Regime::p0);
  CHECK_FALSE(p0.feasible);
  REQUIRE(p0.certificates.size() == 1);
  CHECK(p0.certificates[0].monotone == "N2");
  CHECK(p0.certificates[0].source_value == doctest::Approx(0.4));
  CHECK(p0.certificates[0].target_value == doctest::Approx(0.5));

  ConversionVerdict gpn = convertible(rho, sigma, Regime::gpn);
  CHECK(gpn.feasible);

  // any state reaches a coherent target
  GaussianState coh = single_mode(0.5, 0.5);
  CHECK(convertible(rho, coh, Regime::p0).feasible);
  CHECK(convertible(rho, coh, Regime::gpn).feasible);

  // classical source cannot reach a squeezed target
  GaussianState classical = single_mode(1.3, 0.8);
  GaussianState squeezed = single_mode(1.0, 0.4);
  CHECK_FALSE(convertible(classical, squeezed, Regime::p0).feasible);
  CHECK_FALSE(convertible(classical, squeezed, Regime::gpn).feasible);

  CHECK_THROWS_AS(convertible(GaussianState::vacuum(2), GaussianState::vacuum(2), Regime::p0),
                  std::invalid_argument);
}

TEST_CASE("pure state conversion by squeezing majorization") {
  Vec s42(2), s32(2), s51(2);
  s42 << 4, 2;
  s32 << 3, 2;
  s51 << 5, 1;

  CHECK(pure_convertible(s42, s32).feasible);
  CHECK(pure_convertible(s42, s42).feasible);

  ConversionVerdict v = pure_convertible(s42, s51);
  CHECK_FALSE(v.feasible);
  REQUIRE(v.certificates.size() == 1);
  CHECK(v.certificates[0].monotone == "s1");

  // padding with 1
  Vec s4(1);
  s4 << 4;
  CHECK(pure_convertible(s42, s4).feasible);
  CHECK_FALSE(pure_convertible(s4, s42).feasible);

  Vec bad(1);
  bad << 0.5;
  CHECK_THROWS_AS(pure_convertible(bad, s4), std::invalid_argument);
}

TEST_CASE("squeezing spectrum") {
  Vec s = squeezing_spectrum(GaussianState::vacuum(1));
  CHECK(s(0) == doctest::Approx(1.0));

  s = squeezing_spectrum(single_mode(2.0, 0.125));
  CHECK(s(0) == doctest::Approx(4.0).epsilon(1e-10));

  // two-mode squeezed vacuum
  const double r = 0.7;
  const double c = std::cosh(2.0 * r), sh = std::sinh(2.0 * r);
  Mat v(4, 4);
  v << c, 0, sh, 0,
       0, c, 0, -sh,
       sh, 0, c, 0,
       0, -sh, 0, c;
  v *= 0.5;
  s = squeezing_spectrum(GaussianState::from_cov(v));
  CHECK(s(0) == doctest::Approx(std::exp(2.0 * r)).epsilon(1e-10));
  CHECK(s(1) == doctest::Approx(std::exp(2.0 * r)).epsilon(1e-10));

  CHECK_THROWS_WITH_AS(squeezing_spectrum(single_mode(1.0, 1.0)),
                       doctest::Contains("mixed"), std::invalid_argument);
}

TEST_CASE("p0 achievable region") {
  // eta = 0 keeps the state, eta = 1 swaps in the ancilla
  RegionMembership r = p0_achievable_region(1.0, 0.3, 1.7, 0.6, 1.0, 0.3);
  CHECK(r.inside);
  r = p0_achievable_region(1.0, 0.3, 1.7, 0.6, 1.7, 0.6);
  CHECK(r.inside);

  // boundary example: candidate (0.75, 0.4) from v=(1.0,0.3), y=vacuum
  r = p0_achievable_region(1.0, 0.3, 0.5, 0.5, 0.75, 0.4);
  CHECK(r.inside);
  CHECK(std::abs(r.margin) <= 1e-12);

  // slightly better-squeezed candidate is out of reach
  r = p0_achievable_region(1.0, 0.3, 0.5, 0.5, 0.75, 0.39);
  CHECK_FALSE(r.inside);

  CHECK_THROWS_AS(p0_achievable_region(1.0, 0.3, 0.5, 0.4, 0.75, 0.4), std::invalid_argument);
}

TEST_CASE("p0 region contains every beam splitter construction") {
  std::mt19937_64 rng(97);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  for (int trial = 0; trial < 300; ++trial) {
    const double v_minus = 0.1 + 0.9 * uni(rng);
    const double v_plus = v_minus + 2.0 * uni(rng);
    if (v_plus * v_minus < 0.25) continue;
    const double y_minus = 0.5 + uni(rng);
    const double y_plus = y_minus + 2.0 * uni(rng);
    const double eta = uni(rng);
    Mat rs = phase_rotation(uni(rng) * M_PI);
    Mat ra = phase_rotation(uni(rng) * M_PI);
    Mat v_out = apply_beamsplitter_with_ancilla(diag2(v_plus, v_minus), diag2(y_plus, y_minus),
                                                eta, rs, ra);
    Eigen::SelfAdjointEigenSolver<Mat> es(v_out);
    RegionMembership r = p0_achievable_region(v_plus, v_minus, y_plus, y_minus,
                                              es.eigenvalues()(1), es.eigenvalues()(0));
    CHECK(r.margin >= -1e-10);
  }
}

TEST_CASE("gaussian measurement conditioning") {
  // C = 0: measurement irrelevant
  Mat a = diag2(1.0, 0.7);
  Mat b = diag2(0.9, 0.6);
  Mat z = 0.5 * Mat::Identity(2, 2);
  CHECK((condition_on_gaussian_measurement(a, b, Mat::Zero(2, 2), z) - a).cwiseAbs().maxCoeff() <=
        1e-12);

  // 50/50 beam splitter of squeezed (2, 0.2) against vacuum, project on vacuum
  const double vp = 2.0, vm = 0.2, eta = 0.5;
  Mat vs = diag2(vp, vm);
  Mat va = 0.5 * Mat::Identity(2, 2);
  Mat blk_a = (1.0 - eta) * vs + eta * va;
  Mat blk_b = eta * vs + (1.0 - eta) * va;
  Mat blk_c = std::sqrt(eta * (1.0 - eta)) * (vs - va);
  Mat out = condition_on_gaussian_measurement(blk_a, blk_b, blk_c, z);
  CHECK((out - out.transpose()).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(is_physical(out));

  // homodyne limit consistency
  Mat z_hom = diag2(0.5e-8, 0.5e8);
  Mat hom = condition_on_gaussian_measurement(blk_a, blk_b, blk_c, z_hom);
  HomodyneFeedforwardResult ff = homodyne_feedforward(vp, vm, eta);
  CHECK(std::abs(hom(0, 0) - ff.v_plus) <= 1e-6);
  CHECK(std::abs(hom(1, 1) - ff.v_minus) <= 1e-6);

  CHECK_THROWS_AS(condition_on_gaussian_measurement(a, -b, blk_c, z), std::invalid_argument);
}

TEST_CASE("conditional mean update") {
  Vec mean_a(2), mean_b(2), outcome(2);
  mean_a << 0.3, -0.1;
  mean_b << 0.2, 0.4;
  outcome << 1.0, 0.0;
  Mat b = diag2(0.9, 0.6);
  Mat c = diag2(0.3, -0.2);
  Mat z = 0.5 * Mat::Identity(2, 2);
  Vec shifted = conditional_mean(mean_a, mean_b, b, c, z, outcome);
  Vec expected = mean_a + c * (b + z).inverse() * (outcome - mean_b);
  CHECK((shifted - expected).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("homodyne feed-forward") {
  HomodyneFeedforwardResult r = homodyne_feedforward(2.0, 0.2, 0.5);
  CHECK(r.v_minus == doctest::Approx(0.35).epsilon(1e-12));
  CHECK(r.v_plus == doctest::Approx(0.8).epsilon(1e-12));
  CHECK(r.gamma == doctest::Approx(0.6).epsilon(1e-12));

  auto n3 = [](double vp, double vm) { return (0.5 - vm) / (2.0 - 1.0 / vp); };
  CHECK(n3(r.v_plus, r.v_minus) == doctest::Approx(n3(2.0, 0.2)).epsilon(1e-10));

  r = homodyne_feedforward(2.0, 0.2, 0.0);
  CHECK(r.v_plus == doctest::Approx(2.0));
  CHECK(r.v_minus == doctest::Approx(0.2));
  CHECK(r.gamma == doctest::Approx(0.0));

  r = homodyne_feedforward(2.0, 0.2, 1.0);
  CHECK(r.v_plus == doctest::Approx(0.5));
  CHECK(r.v_minus == doctest::Approx(0.5));

  CHECK_THROWS_AS(homodyne_feedforward(0.2, 2.0, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(homodyne_feedforward(0.4, 0.4, 0.5), std::invalid_argument);
}

TEST_CASE("homodyne feed-forward invariants on random inputs") {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  for (int trial = 0; trial < 500; ++trial) {
    const double vm = 0.05 + 0.44 * uni(rng);
    const double vp = std::max(0.25 / vm, vm) + 2.0 * uni(rng);
    const double eta = uni(rng);
    HomodyneFeedforwardResult r = homodyne_feedforward(vp, vm, eta);
    CHECK(std::abs(r.v_minus - ((1.0 - eta) * vm + 0.5 * eta)) <= 1e-12);
    const double n3_in = (0.5 - vm) / (2.0 - 1.0 / vp);
    const double n3_out = (0.5 - r.v_minus) / (2.0 - 1.0 / r.v_plus);
    if (eta < 1.0) CHECK(std::abs(n3_out - n3_in) <= 1e-10);
  }
}

TEST_CASE("fg spectra of gaussian states") {
  auto [f_vac, g_vac] = gaussian_fg_spectra(0.5 * Mat::Identity(2, 2));
  CHECK(f_vac.cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(g_vac.cwiseAbs().maxCoeff() <= 1e-12);

  auto [f, g] = gaussian_fg_spectra(diag2(2.0, 0.125));
  CHECK(f(0) == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(f(1) == doctest::Approx(0.0));
  CHECK(g(0) == doctest::Approx(1.125).epsilon(1e-12));

  auto [f_th, g_th] = gaussian_fg_spectra(diag2(0.8, 0.8));
  CHECK(f_th.cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(g_th.cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("beam splitter with classical ancilla") {
  Mat v = diag2(1.0, 0.3);
  Mat y = 0.5 * Mat::Identity(2, 2);
  Mat id = Mat::Identity(2, 2);

  Mat out = apply_beamsplitter_with_ancilla(v, y, 0.3, id, id);
  CHECK(out(0, 0) == doctest::Approx(0.85).epsilon(1e-12));
  CHECK(out(1, 1) == doctest::Approx(0.36).epsilon(1e-12));

  Mat rot = phase_rotation(0.8);
  CHECK((apply_beamsplitter_with_ancilla(v, y, 0.0, rot, id) - rot * v * rot.transpose())
            .cwiseAbs()
            .maxCoeff() <= 1e-12);
  CHECK((apply_beamsplitter_with_ancilla(v, y, 1.0, id, rot) - rot * y * rot.transpose())
            .cwiseAbs()
            .maxCoeff() <= 1e-12);

  CHECK_THROWS_AS(apply_beamsplitter_with_ancilla(v, diag2(1.0, 0.2), 0.5, id, id),
                  std::invalid_argument);
}

TEST_CASE("N1 never increases under free gaussian operations") {
  std::mt19937_64 rng(53);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    Mat v = random_covariance(rng, 1);
    const double n1_in = n_measures(v).n1;

    const double y_minus = 0.5 + uni(rng);
    Mat y = diag2(y_minus + uni(rng), y_minus);
    Mat v_bs = apply_beamsplitter_with_ancilla(v, y, uni(rng), phase_rotation(uni(rng) * M_PI),
                                               phase_rotation(uni(rng) * M_PI));
    CHECK(n_measures(v_bs).n1 <= n1_in + 1e-9);

    Eigen::SelfAdjointEigenSolver<Mat> es(v);
    HomodyneFeedforwardResult ff =
        homodyne_feedforward(es.eigenvalues()(1), es.eigenvalues()(0), uni(rng));
    CHECK(n_measures(diag2(ff.v_plus, ff.v_minus)).n1 <= n1_in + 1e-9);
  }
}

TEST_CASE("homodyne feed-forward walks the N3-constant curve") {
  // outputs are gpn-reachable but p0-unreachable from the source
  GaussianState source = GaussianState::from_cov(diag2(1.0, 0.3));
  for (double eta : {0.2, 0.4, 0.7}) {
    HomodyneFeedforwardResult r = homodyne_feedforward(1.0, 0.3, eta);
    GaussianState out = GaussianState::from_cov(diag2(r.v_plus, r.v_minus));
    CHECK(convertible(source, out, Regime::gpn).feasible);
    CHECK_FALSE(convertible(source, out, Regime::p0).feasible);
  }
}
