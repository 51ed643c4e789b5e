#include "cvnc/protocols.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <map>
#include <random>

#include "cvnc/symplectic.hpp"

namespace cvnc {

namespace {

constexpr double kBranchFloor = 1e-14;

struct BranchWork {
  std::vector<int> record;
  double probability;
  std::optional<FockState> post;
};

FockState attach_ancillas(const FockState& state, const std::vector<cplx>& ancillas, int cutoff) {
  if (ancillas.empty()) return state;
  FockPure anc = coherent_state(ancillas, cutoff);
  if (std::holds_alternative<FockPure>(state))
    return tensor(std::get<FockPure>(state), anc);
  return tensor(std::get<FockDensity>(state), FockDensity(anc));
}

FockState apply_unitary_state(const FockState& state, const CMat& u) {
  if (std::holds_alternative<FockPure>(state))
    return apply_mode_unitary(std::get<FockPure>(state), u);
  return apply_mode_unitary(std::get<FockDensity>(state), u);
}

FockState displace_state(const FockState& state, const std::vector<cplx>& alphas) {
  if (std::holds_alternative<FockPure>(state))
    return apply_displacement(std::get<FockPure>(state), alphas);
  return apply_displacement(std::get<FockDensity>(state), alphas);
}

double state_weight(const FockState& state) {
  if (std::holds_alternative<FockPure>(state)) return std::get<FockPure>(state).amplitudes().squaredNorm();
  return std::get<FockDensity>(state).trace();
}

// Indices of `subset` relabeled after `removed` modes disappear.
std::vector<int> relabel_after_removal(const std::vector<int>& subset,
                                       const std::vector<int>& removed) {
  std::vector<int> out;
  out.reserve(subset.size());
  for (int m : subset) {
    int shift = 0;
    for (int r : removed) {
      require(r != m, "protocol step: measured and traced mode sets must be disjoint");
      if (r < m) ++shift;
    }
    out.push_back(m - shift);
  }
  return out;
}

void evaluate_step(const FockState& state, const ProtocolStep& step, int step_index,
                   std::vector<int> record, double probability,
                   std::vector<BranchWork>& out) {
  const int cutoff = cutoff_of(state);
  const int n_in = n_modes_of(state);
  const int n_anc = static_cast<int>(step.ancillas.size());
  const int n_measured = step.measurement ? static_cast<int>(step.measurement->modes.size()) : 0;
  const int n_out = n_in + n_anc - n_measured - static_cast<int>(step.trace_out.size());
  require(n_out >= 0, "protocol step " + std::to_string(step_index) + ": removes more modes than exist");
  if (!step.allow_oversized_ancilla)
    require(n_anc <= std::max(n_out, 0),
            "protocol step " + std::to_string(step_index) +
                ": ancilla count exceeds the output mode count (pass allow_oversized_ancilla to override)");

  FockState current = attach_ancillas(state, step.ancillas, cutoff);
  if (step.unitary.size() > 0) {
    require(step.unitary.rows() == n_in + n_anc,
            "protocol step " + std::to_string(step_index) + ": unitary dimension " +
                std::to_string(step.unitary.rows()) + " does not match mode count " +
                std::to_string(n_in + n_anc));
    current = apply_unitary_state(current, step.unitary);
  }

  struct LocalBranch {
    std::vector<int> outcome;
    double probability;
    std::optional<FockState> post;
  };
  std::vector<LocalBranch> locals;

  if (!step.measurement) {
    locals.push_back({{}, state_weight(current), current});
  } else {
    const Measurement& meas = *step.measurement;
    require(!meas.modes.empty(), "protocol step: measurement mode subset must be nonempty");
    switch (meas.kind) {
      case MeasurementKind::photon_count: {
        for (CountOutcome& oc : measure_photon_number(current, meas.modes))
          locals.push_back({oc.counts, oc.probability, std::move(oc.post)});
        break;
      }
      case MeasurementKind::vacuum_projection:
      case MeasurementKind::coherent_projection: {
        require(meas.modes.size() == 1, "projection measurements act on a single mode");
        const ProjectionTarget target = meas.kind == MeasurementKind::vacuum_projection
                                            ? ProjectionTarget::make_vacuum()
                                            : ProjectionTarget::make_coherent(meas.alpha);
        ProjectionResult click = project_onto(current, meas.modes[0], target);
        const double total = state_weight(current);

        // no-click complement on the surviving modes
        FockDensity reduced = partial_trace(as_density(current), meas.modes);
        CMat complement = reduced.matrix();
        if (click.post) {
          FockDensity click_density = as_density(*click.post);
          complement -= click.probability * click_density.matrix();
        }
        const double p_rest = total - click.probability;
        std::optional<FockState> rest_post;
        if (p_rest > kBranchFloor)
          rest_post = FockDensity(reduced.n_modes(), cutoff, complement / p_rest);
        locals.push_back({{0}, p_rest, std::move(rest_post)});
        locals.push_back({{1}, click.probability, std::move(click.post)});
        break;
      }
    }
  }

  const std::vector<int> measured = step.measurement ? step.measurement->modes : std::vector<int>{};
  const std::vector<int> traced = relabel_after_removal(step.trace_out, measured);

  for (LocalBranch& lb : locals) {
    std::vector<int> next_record = record;
    next_record.insert(next_record.end(), lb.outcome.begin(), lb.outcome.end());
    const double p = probability * lb.probability;

    std::optional<FockState> post = std::move(lb.post);
    if (post && !traced.empty())
      post = FockState(partial_trace(as_density(*post), traced));

    if (!post || p <= kBranchFloor) {
      out.push_back({std::move(next_record), p, std::nullopt});
      continue;
    }

    // linear-gain displacement on the surviving modes
    if (step.gain.size() > 0) {
      require(step.gain.cols() == static_cast<Eigen::Index>(lb.outcome.size()),
              "protocol step: gain column count must match the outcome length");
      require(step.gain.rows() == n_modes_of(*post),
              "protocol step: gain row count must match the surviving mode count");
      CVec counts(lb.outcome.size());
      for (std::size_t k = 0; k < lb.outcome.size(); ++k) counts(k) = static_cast<double>(lb.outcome[k]);
      CVec delta = step.gain * counts;
      if (delta.cwiseAbs().maxCoeff() > 0.0)
        post = displace_state(*post, std::vector<cplx>(delta.data(), delta.data() + delta.size()));
    }

    // outcome table: first matching rule wins
    const FeedForwardRule* rule = nullptr;
    for (const FeedForwardRule& r : step.rules) {
      if (!r.outcome || *r.outcome == lb.outcome) {
        rule = &r;
        break;
      }
    }
    if (rule && !rule->displacement.empty()) {
      require(static_cast<int>(rule->displacement.size()) == n_modes_of(*post),
              "protocol step: feed-forward displacement length mismatch");
      post = displace_state(*post, rule->displacement);
    }

    const ProtocolStep* continuation = nullptr;
    if (rule && rule->next) continuation = rule->next.get();
    else if (step.next) continuation = step.next.get();

    if (continuation) {
      evaluate_step(*post, *continuation, step_index + 1, std::move(next_record), p, out);
    } else {
      out.push_back({std::move(next_record), p, std::move(post)});
    }
  }
}

}  // namespace

std::vector<BranchOutcome> run_instrument(const FockState& state, const ProtocolStep& step) {
  std::vector<BranchWork> work;
  evaluate_step(state, step, 0, {}, 1.0, work);

  std::sort(work.begin(), work.end(),
            [](const BranchWork& a, const BranchWork& b) { return a.record < b.record; });

  std::vector<BranchOutcome> branches;
  branches.reserve(work.size() + 1);
  double total = 0.0;
  for (BranchWork& w : work) {
    total += w.probability;
    branches.push_back({std::move(w.record), w.probability, std::move(w.post), false});
  }
  BranchOutcome overflow;
  overflow.record = {};
  overflow.probability = std::max(0.0, 1.0 - total);
  overflow.post = std::nullopt;
  overflow.overflow = true;
  branches.push_back(std::move(overflow));
  return branches;
}

std::vector<BranchOutcome> coarse_grain(const std::vector<BranchOutcome>& branches,
                                        const std::vector<int>& kept_record_indices) {
  std::map<std::vector<int>, std::vector<const BranchOutcome*>> groups;
  double overflow_p = 0.0;
  for (const BranchOutcome& b : branches) {
    if (b.overflow) {
      overflow_p += b.probability;
      continue;
    }
    std::vector<int> key;
    for (int idx : kept_record_indices) {
      require(idx >= 0, "coarse_grain: negative record index");
      if (idx < static_cast<int>(b.record.size())) key.push_back(b.record[idx]);
    }
    groups[key].push_back(&b);
  }

  std::vector<BranchOutcome> out;
  for (auto& [key, members] : groups) {
    BranchOutcome merged;
    merged.record = key;
    merged.probability = 0.0;
    CMat mix;
    int n_modes = -1, cutoff = 0;
    for (const BranchOutcome* b : members) {
      merged.probability += b->probability;
      if (!b->post) continue;
      FockDensity d = as_density(*b->post);
      if (n_modes < 0) {
        n_modes = d.n_modes();
        cutoff = d.cutoff();
        mix = CMat::Zero(d.dim(), d.dim());
      }
      require(d.n_modes() == n_modes && d.cutoff() == cutoff,
              "coarse_grain: branches in one group must share shape");
      mix += b->probability * d.matrix();
    }
    if (n_modes > 0 && merged.probability > kBranchFloor)
      merged.post = FockState(FockDensity(n_modes, cutoff, mix / merged.probability));
    out.push_back(std::move(merged));
  }
  BranchOutcome overflow;
  overflow.probability = overflow_p;
  overflow.overflow = true;
  out.push_back(std::move(overflow));
  return out;
}

CatGrowthReport cat_growth_protocol(cplx alpha, int cutoff) {
  // cutoff must hold the grown cat; constructing it first fails loudly if not
  FockPure grown_ref = cat_state(std::sqrt(2.0) * alpha, 1, cutoff);
  (void)grown_ref;
  FockPure cat = cat_state(alpha, 1, cutoff);
  FockPure pair = tensor(cat, cat);

  ProtocolStep step;
  step.unitary = beam_splitter_unitary(0.5, 0, 1, 2);
  step.measurement = Measurement{{0}, MeasurementKind::vacuum_projection, {}};

  std::vector<BranchOutcome> branches = run_instrument(pair, step);
  const BranchOutcome* click = nullptr;
  for (const BranchOutcome& b : branches)
    if (!b.overflow && b.record == std::vector<int>{1}) click = &b;
  require(click && click->post, "cat_growth_protocol: vacuum branch vanished");

  CatGrowthReport report{
      click->probability,
      std::get<FockPure>(*click->post),
      w_spectrum(quadrature_moments(pair).cov)(0),
      w_spectrum(quadrature_moments(*click->post).cov)(0),
      0.0,
      false,
  };
  report.slack = report.w1_before - report.p_success * report.w1_after;
  report.bound_respected = report.slack >= -1e-9;
  return report;
}

KrausFit fit_coherent_map(const std::vector<std::pair<CVec, CVec>>& samples) {
  require(!samples.empty(), "fit_coherent_map: no samples");
  const int n_in = static_cast<int>(samples.front().first.size());
  const int n_out = static_cast<int>(samples.front().second.size());
  require(static_cast<int>(samples.size()) >= n_in + 1,
          "fit_coherent_map: need at least n_in + 1 samples");

  CMat design(samples.size(), n_in + 1);
  CMat target(samples.size(), n_out);
  for (std::size_t s = 0; s < samples.size(); ++s) {
    design.row(s).head(n_in) = samples[s].first.transpose();
    design(s, n_in) = 1.0;
    target.row(s) = samples[s].second.transpose();
  }
  CMat coeff = design.colPivHouseholderQr().solve(target);  // (n_in+1) x n_out

  KrausFit fit;
  fit.m = coeff.topRows(n_in).transpose();
  fit.delta = coeff.row(n_in).transpose();
  Eigen::JacobiSVD<CMat> svd(fit.m);
  fit.max_singular_value = svd.singularValues().size() > 0 ? svd.singularValues()(0) : 0.0;
  fit.residual = (design * coeff - target).cwiseAbs().maxCoeff();
  fit.applicable = true;
  fit.worst_cov_deviation = 0.0;
  return fit;
}

std::vector<KrausFit> verify_kraus_contraction(const ProtocolStep& step, int n_input_modes,
                                               int cutoff, int sample_count,
                                               double alpha_magnitude, double cov_tol,
                                               unsigned seed) {
  require(sample_count >= n_input_modes + 2, "verify_kraus_contraction: too few samples");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);

  struct BranchSamples {
    std::vector<std::pair<CVec, CVec>> pairs;
    double worst_cov_deviation = 0.0;
    bool coherent = true;
  };
  std::map<std::vector<int>, BranchSamples> by_record;

  for (int s = 0; s < sample_count; ++s) {
    CVec alpha_in(n_input_modes);
    std::vector<cplx> alphas(n_input_modes);
    for (int m = 0; m < n_input_modes; ++m) {
      alphas[m] = alpha_magnitude * cplx(uni(rng), uni(rng));
      alpha_in(m) = alphas[m];
    }
    FockPure input = coherent_state(alphas, cutoff);
    for (const BranchOutcome& b : run_instrument(input, step)) {
      if (b.overflow || !b.post || b.probability < 1e-9) continue;
      BranchSamples& bucket = by_record[b.record];
      QuadratureMoments mom = quadrature_moments(*b.post);
      const int n_out = n_modes_of(*b.post);
      const double dev =
          (mom.cov - 0.5 * Mat::Identity(2 * n_out, 2 * n_out)).cwiseAbs().maxCoeff();
      bucket.worst_cov_deviation = std::max(bucket.worst_cov_deviation, dev);
      if (dev > cov_tol) bucket.coherent = false;
      CVec alpha_out(n_out);
      for (int m = 0; m < n_out; ++m)
        alpha_out(m) = cplx(mom.mean(2 * m), mom.mean(2 * m + 1)) / std::sqrt(2.0);
      bucket.pairs.push_back({alpha_in, alpha_out});
    }
  }

  std::vector<KrausFit> fits;
  for (auto& [record, bucket] : by_record) {
    if (!bucket.coherent || static_cast<int>(bucket.pairs.size()) < n_input_modes + 2) {
      KrausFit bad;
      bad.record = record;
      bad.applicable = false;
      bad.worst_cov_deviation = bucket.worst_cov_deviation;
      bad.max_singular_value = 0.0;
      bad.residual = 0.0;
      fits.push_back(std::move(bad));
      continue;
    }
    KrausFit fit = fit_coherent_map(bucket.pairs);
    fit.record = record;
    fit.worst_cov_deviation = bucket.worst_cov_deviation;
    fits.push_back(std::move(fit));
  }
  return fits;
}

namespace {

bool protocol_is_measurement_free(const ProtocolStep& step) {
  if (step.measurement) return false;
  for (const FeedForwardRule& r : step.rules)
    if (r.next && !protocol_is_measurement_free(*r.next)) return false;
  return !step.next || protocol_is_measurement_free(*step.next);
}

Vec family_spectrum(const FockState& state, MonotoneFamily family) {
  switch (family) {
    case MonotoneFamily::v:
      return v_spectrum(quadrature_moments(state).cov);
    case MonotoneFamily::w:
      return w_spectrum(quadrature_moments(state).cov);
    case MonotoneFamily::f:
      return f_spectrum(qfi_matrix(as_density(state)));
    case MonotoneFamily::g:
      return g_spectrum(qfi_matrix(as_density(state)));
  }
  throw std::logic_error("unreachable");
}

}  // namespace

MonotonicityReport check_monotonicity(const FockState& state, const ProtocolStep& step,
                                      MonotoneFamily family, double tol) {
  const bool variance_family = family == MonotoneFamily::v || family == MonotoneFamily::w;
  if (variance_family && !std::holds_alternative<FockPure>(state))
    throw std::invalid_argument(
        "check_monotonicity: V/W families are pure-state statements; use F/G for mixed inputs");

  const Vec in_spec = family_spectrum(state, family);
  const double in_full = partial_sum(in_spec, static_cast<int>(in_spec.size()));

  MonotonicityReport report;
  report.ensemble_margin = in_full;
  report.ensemble_evaluated = true;
  report.eigenwise_evaluated = false;
  report.eigenwise_margin = 0.0;

  double ensemble_sum = 0.0;
  for (const BranchOutcome& b : run_instrument(state, step)) {
    if (b.overflow || !b.post) continue;
    MonotonicityReport::Branch line;
    line.record = b.record;
    line.probability = b.probability;
    line.skipped_mixed = false;
    line.ok = true;
    line.worst_margin = 0.0;

    if (variance_family && !std::holds_alternative<FockPure>(*b.post)) {
      line.skipped_mixed = true;
      report.ensemble_evaluated = false;
      report.branches.push_back(std::move(line));
      continue;
    }

    const Vec out_spec = family_spectrum(*b.post, family);
    double worst = std::numeric_limits<double>::infinity();
    for (int k = 1; k <= static_cast<int>(out_spec.size()); ++k) {
      const double margin = partial_sum(in_spec, k) - b.probability * partial_sum(out_spec, k);
      worst = std::min(worst, margin);
    }
    line.worst_margin = worst;
    line.ok = worst >= -tol;
    ensemble_sum += b.probability * partial_sum(out_spec, static_cast<int>(out_spec.size()));

    if (protocol_is_measurement_free(step) && (family == MonotoneFamily::f || family == MonotoneFamily::g)) {
      report.eigenwise_evaluated = true;
      double eig_margin = std::numeric_limits<double>::infinity();
      for (int i = 0; i < static_cast<int>(out_spec.size()) && i < static_cast<int>(in_spec.size()); ++i)
        eig_margin = std::min(eig_margin, in_spec(i) - out_spec(i));
      report.eigenwise_margin = eig_margin;
      line.ok = line.ok && eig_margin >= -tol;
    }
    report.branches.push_back(std::move(line));
  }

  report.ensemble_margin = in_full - ensemble_sum;
  report.ensemble_ok = !report.ensemble_evaluated || report.ensemble_margin >= -tol;
  report.all_ok = report.ensemble_ok;
  for (const auto& b : report.branches) report.all_ok = report.all_ok && b.ok;
  return report;
}

}  // namespace cvnc
