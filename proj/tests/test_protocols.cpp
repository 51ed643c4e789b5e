#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "cvnc/fock.hpp"
#include "cvnc/gaussian.hpp"
#include "cvnc/protocols.hpp"
#include "cvnc/symplectic.hpp"
#include "test_helpers.hpp"

using namespace cvnc;
using cvnc::testing::random_unitary;

namespace {

double fidelity(const FockPure& a, const FockPure& b) {
  return std::norm(a.amplitudes().dot(b.amplitudes()));
}

double branch_total(const std::vector<BranchOutcome>& branches) {
  double total = 0.0;
  for (const auto& b : branches)
    if (!b.overflow) total += b.probability;
  return total;
}

ProtocolStep loss_protocol(double eta) {
  ProtocolStep step;
  step.ancillas = {cplx(0.0, 0.0)};
  step.unitary = beam_splitter_unitary(eta, 0, 1, 2);
  step.trace_out = {1};
  return step;
}

}  // namespace

TEST_CASE("empty protocol is the identity instrument") {
  FockPure coh = coherent_state({cplx(0.9, 0.1)}, 20);
  ProtocolStep step;
  auto branches = run_instrument(coh, step);
  REQUIRE(branches.size() == 2);  // single branch + overflow record
  CHECK(branches[0].probability == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(fidelity(std::get<FockPure>(*branches[0].post), coh) == doctest::Approx(1.0));
  CHECK(branches[1].overflow);
  CHECK(branches[1].probability <= 1e-9);
}

TEST_CASE("pure loss sends coherent states to attenuated coherent states") {
  const double eta = 0.36;
  FockPure coh = coherent_state({cplx(1.2, -0.5)}, 26);
  auto branches = run_instrument(coh, loss_protocol(eta));
  REQUIRE(branches.size() == 2);
  const FockDensity& out = std::get<FockDensity>(*branches[0].post);
  FockPure target = coherent_state({std::sqrt(1.0 - eta) * cplx(1.2, -0.5)}, 26);
  const double fid = (target.amplitudes().adjoint() * out.matrix() * target.amplitudes())(0).real();
  CHECK(fid >= 1.0 - 1e-8);
}

TEST_CASE("photon subtraction turns an even cat into an odd cat") {
  const double eta = 0.01;
  FockPure cat = cat_state(cplx(2.0, 0.0), 1, 36);
  ProtocolStep step;
  step.ancillas = {cplx(0.0, 0.0)};
  step.unitary = beam_splitter_unitary(eta, 0, 1, 2);
  step.measurement = Measurement{{1}, MeasurementKind::photon_count, {}};

  auto branches = run_instrument(cat, step);
  CHECK(std::abs(branch_total(branches) + branches.back().probability - 1.0) <= 1e-9);

  const BranchOutcome* one_click = nullptr;
  for (const auto& b : branches)
    if (!b.overflow && b.record == std::vector<int>{1}) one_click = &b;
  REQUIRE(one_click);
  const FockPure& post = std::get<FockPure>(*one_click->post);
  CHECK(fidelity(post, cat_state(cplx(2.0, 0.0), -1, 36)) >= 0.999);
  CHECK(fidelity(post, cat_state(std::sqrt(1.0 - eta) * cplx(2.0, 0.0), -1, 36)) >= 1.0 - 1e-6);
}

TEST_CASE("branch probabilities sum to one minus truncation") {
  std::mt19937_64 rng(3);
  FockPure state = cat_state(cplx(1.3, 0.2), 1, 24);
  ProtocolStep step;
  step.ancillas = {cplx(0.4, 0.0)};
  step.unitary = random_unitary(rng, 2);
  step.measurement = Measurement{{0}, MeasurementKind::photon_count, {}};
  auto branches = run_instrument(state, step);
  CHECK(std::abs(branch_total(branches) + branches.back().probability - 1.0) <= 1e-9);
  CHECK(branches.back().probability <= 1e-6);
}

TEST_CASE("feed-forward displacement with linear gain") {
  // single photon split 50/50; detecting it on mode 1 triggers a displacement
  FockPure one = fock_superposition({{1, 1.0}}, 12);
  ProtocolStep step;
  step.ancillas = {cplx(0.0, 0.0)};
  step.unitary = beam_splitter_unitary(0.5, 0, 1, 2);
  step.measurement = Measurement{{1}, MeasurementKind::photon_count, {}};
  step.gain = CMat::Zero(1, 1);
  step.gain(0, 0) = cplx(0.7, 0.0);

  auto branches = run_instrument(one, step);
  for (const auto& b : branches) {
    if (b.overflow || !b.post) continue;
    Vec mean = quadrature_moments(*b.post).mean;
    if (b.record == std::vector<int>{0}) {
      CHECK(std::abs(mean(0)) <= 1e-10);  // no click, no displacement
    } else if (b.record == std::vector<int>{1}) {
      CHECK(mean(0) == doctest::Approx(std::sqrt(2.0) * 0.7).epsilon(1e-8));
    }
  }
}

TEST_CASE("outcome table feed-forward routes branches to next steps") {
  FockPure one = fock_superposition({{1, 1.0}}, 10);
  auto second = std::make_shared<ProtocolStep>();
  second->ancillas = {cplx(0.0, 0.0)};
  second->unitary = beam_splitter_unitary(0.5, 0, 1, 2);
  second->measurement = Measurement{{1}, MeasurementKind::photon_count, {}};

  ProtocolStep first;
  first.ancillas = {cplx(0.0, 0.0)};
  first.unitary = beam_splitter_unitary(0.5, 0, 1, 2);
  first.measurement = Measurement{{1}, MeasurementKind::photon_count, {}};
  FeedForwardRule on_zero;
  on_zero.outcome = std::vector<int>{0};
  on_zero.next = second;
  first.rules = {on_zero};

  auto branches = run_instrument(one, first);
  // records: {0,0}, {0,1}, {1} and overflow
  bool saw_00 = false, saw_01 = false, saw_1 = false;
  for (const auto& b : branches) {
    if (b.overflow) continue;
    if (b.record == std::vector<int>{0, 0}) {
      saw_00 = true;
      CHECK(b.probability == doctest::Approx(0.25).epsilon(1e-10));
    }
    if (b.record == std::vector<int>{0, 1}) {
      saw_01 = true;
      CHECK(b.probability == doctest::Approx(0.25).epsilon(1e-10));
    }
    if (b.record == std::vector<int>{1}) {
      saw_1 = true;
      CHECK(b.probability == doctest::Approx(0.5).epsilon(1e-10));
    }
  }
  CHECK(saw_00);
  CHECK(saw_01);
  CHECK(saw_1);
}

TEST_CASE("coarse graining merges branch records") {
  FockPure one = fock_superposition({{1, 1.0}}, 10);
  ProtocolStep step;
  step.ancillas = {cplx(0.0, 0.0)};
  step.unitary = beam_splitter_unitary(0.5, 0, 1, 2);
  step.measurement = Measurement{{1}, MeasurementKind::photon_count, {}};

  auto fine = run_instrument(one, step);
  auto merged = coarse_grain(fine, {});
  double p_merged = 0.0;
  for (const auto& b : merged)
    if (!b.overflow) p_merged += b.probability;
  CHECK(p_merged == doctest::Approx(branch_total(fine)).epsilon(1e-12));
  // the merged state is the deterministic (P0) output: maximally mixed over |0>,|1>
  const BranchOutcome* all = nullptr;
  for (const auto& b : merged)
    if (!b.overflow && b.record.empty()) all = &b;
  REQUIRE(all);
  const FockDensity& rho = std::get<FockDensity>(*all->post);
  CHECK(std::abs(rho.matrix()(0, 0).real() - 0.5) <= 1e-10);
  CHECK(std::abs(rho.matrix()(1, 1).real() - 0.5) <= 1e-10);
}

TEST_CASE("ancilla size bound is enforced with an override") {
  FockPure coh = coherent_state({cplx(0.3, 0.0)}, 8);
  ProtocolStep step;
  step.ancillas = {cplx(0.0, 0.0), cplx(0.0, 0.0)};  // 2 ancillas
  step.unitary = CMat::Identity(3, 3);
  step.trace_out = {1, 2};  // 1 output mode < 2 ancillas
  CHECK_THROWS_AS(run_instrument(coh, step), std::invalid_argument);
  step.allow_oversized_ancilla = true;
  CHECK_NOTHROW(run_instrument(coh, step));
}

TEST_CASE("cat growth doubles the cat") {
  CatGrowthReport report = cat_growth_protocol(cplx(2.0, 0.0), 48);
  CHECK(std::abs(report.p_success - 0.5) <= 2e-2);
  CHECK(std::abs(report.w1_after / report.w1_before - 2.0) <= 2e-2);
  CHECK(report.bound_respected);
  // the bound saturates exactly for this scheme; slack is zero up to roundoff
  CHECK(report.slack >= -1e-9);
  CHECK(std::abs(report.slack) <= 1e-9);
  FockPure target = cat_state(cplx(2.0 * std::sqrt(2.0), 0.0), 1, 48);
  CHECK(fidelity(report.output, target) >= 0.999);

  // small-cat regime: asymptotics break but the monotone bound holds
  report = cat_growth_protocol(cplx(0.3, 0.0), 16);
  CHECK(std::abs(report.p_success - 0.5) > 2e-2);
  CHECK(report.bound_respected);
}

TEST_CASE("kraus fits of the loss channel") {
  auto fits = verify_kraus_contraction(loss_protocol(0.19), 1, 24, 8, 1.0);
  REQUIRE(fits.size() == 1);
  CHECK(fits[0].applicable);
  CHECK(fits[0].residual <= 1e-6);
  CHECK(fits[0].max_singular_value == doctest::Approx(std::sqrt(0.81)).epsilon(1e-6));
  CHECK(fits[0].delta.cwiseAbs().maxCoeff() <= 1e-7);

  // identity protocol
  ProtocolStep id;
  auto id_fits = verify_kraus_contraction(id, 1, 24, 8, 1.0);
  REQUIRE(id_fits.size() == 1);
  CHECK(id_fits[0].max_singular_value == doctest::Approx(1.0).epsilon(1e-8));

  // photon subtraction branches are all contractions
  ProtocolStep sub;
  sub.ancillas = {cplx(0.0, 0.0)};
  sub.unitary = beam_splitter_unitary(0.05, 0, 1, 2);
  sub.measurement = Measurement{{1}, MeasurementKind::photon_count, {}};
  for (const KrausFit& fit : verify_kraus_contraction(sub, 1, 24, 8, 1.0)) {
    if (!fit.applicable) continue;
    CHECK(fit.residual <= 1e-6);
    CHECK(fit.max_singular_value <= 1.0 + 1e-6);
  }
}

TEST_CASE("amplifier map is flagged by the fit") {
  // |alpha> -> |1.5 alpha> is not expressible as a ProtocolStep; inject the
  // map directly as coherent-amplitude samples.
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  std::vector<std::pair<CVec, CVec>> samples;
  for (int s = 0; s < 10; ++s) {
    CVec in(1), out(1);
    in(0) = cplx(uni(rng), uni(rng));
    out(0) = 1.5 * in(0);
    samples.push_back({in, out});
  }
  KrausFit fit = fit_coherent_map(samples);
  CHECK(fit.max_singular_value == doctest::Approx(1.5).epsilon(1e-10));
  CHECK(fit.residual <= 1e-10);
}

TEST_CASE("monotonicity of W under cat growth") {
  FockPure pair = tensor(cat_state(cplx(2.0, 0.0), 1, 44), cat_state(cplx(2.0, 0.0), 1, 44));
  ProtocolStep step;
  step.unitary = beam_splitter_unitary(0.5, 0, 1, 2);
  step.measurement = Measurement{{0}, MeasurementKind::vacuum_projection, {}};

  MonotonicityReport report = check_monotonicity(pair, step, MonotoneFamily::w);
  bool saw_click = false;
  for (const auto& b : report.branches) {
    if (b.record == std::vector<int>{1}) {
      saw_click = true;
      CHECK(b.ok);
      CHECK(b.worst_margin >= -1e-9);
    }
    if (b.record == std::vector<int>{0}) CHECK(b.skipped_mixed);
  }
  CHECK(saw_click);
  CHECK(report.all_ok);
}

TEST_CASE("P0 loss is eigenwise monotone for the QFI spectra") {
  const int cutoff = 40;
  CMat sq = squeeze_operator(-0.5 * std::log(4.0), cutoff);
  CVec vac = CVec::Zero(cutoff);
  vac(0) = 1.0;
  FockPure squeezed(1, cutoff, sq * vac);

  MonotonicityReport report = check_monotonicity(squeezed, loss_protocol(0.3), MonotoneFamily::f);
  CHECK(report.eigenwise_evaluated);
  CHECK(report.eigenwise_margin >= -1e-8);
  CHECK(report.all_ok);

  report = check_monotonicity(squeezed, loss_protocol(0.3), MonotoneFamily::g);
  CHECK(report.all_ok);

  CHECK_THROWS_AS(
      check_monotonicity(FockState(thermal_state(0.8, 24)), loss_protocol(0.3), MonotoneFamily::v),
      std::invalid_argument);
}

TEST_CASE("random P1 protocols respect the variance monotones") {
  std::mt19937_64 rng(2718);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int trial = 0; trial < 25; ++trial) {
    // support capped at total photon number cutoff-1 keeps the instrument
    // exact on the truncated space
    const int cutoff = 8;
    CVec amp = CVec::Zero(cutoff * cutoff);
    for (int m = 0; m < cutoff; ++m)
      for (int n = 0; n + m < cutoff; ++n) amp(m * cutoff + n) = cplx(gauss(rng), gauss(rng));
    amp /= amp.norm();
    FockPure state(2, cutoff, amp);

    ProtocolStep step;
    step.ancillas = {cplx(0.1 * gauss(rng), 0.1 * gauss(rng))};
    step.unitary = random_unitary(rng, 3);
    step.measurement = Measurement{{static_cast<int>(rng() % 3)}, MeasurementKind::photon_count, {}};

    CHECK(check_monotonicity(state, step, MonotoneFamily::v).all_ok);
    CHECK(check_monotonicity(state, step, MonotoneFamily::w).all_ok);
  }
}

TEST_CASE("branch probability of hitting a target respects the vidal bound") {
  // cat growth: the vacuum branch reaches cat(sqrt(2) alpha) with fidelity
  // >= 0.999; its probability must stay within 2e-2 of the w-spectrum bound
  FockPure cat = cat_state(cplx(2.0, 0.0), 1, 48);
  FockPure pair = tensor(cat, cat);
  FockPure target = cat_state(std::sqrt(2.0) * cplx(2.0, 0.0), 1, 48);

  ProtocolStep step;
  step.unitary = beam_splitter_unitary(0.5, 0, 1, 2);
  step.measurement = Measurement{{0}, MeasurementKind::vacuum_projection, {}};

  double p_reach = 0.0;
  for (const auto& b : run_instrument(pair, step)) {
    if (b.overflow || !b.post || !std::holds_alternative<FockPure>(*b.post)) continue;
    if (fidelity(std::get<FockPure>(*b.post), target) >= 0.999) p_reach += b.probability;
  }
  CHECK(p_reach > 0.4);

  const Vec w_source = w_spectrum(quadrature_moments(pair).cov);
  const Vec w_target = w_spectrum(quadrature_moments(target).cov);
  const double bound = vidal_probability_bound(w_source, w_target);
  CHECK(p_reach <= bound + 2e-2);

  const Vec v_source = v_spectrum(quadrature_moments(pair).cov);
  const Vec v_target = v_spectrum(quadrature_moments(target).cov);
  CHECK(p_reach <= vidal_probability_bound(v_source, v_target) + 2e-2);
}
