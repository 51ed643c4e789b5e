#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <sstream>

#include "cvnc/selftest.hpp"
#include "cvnc/statespec.hpp"
#include "cvnc/symplectic.hpp"

using namespace cvnc;

namespace {

constexpr int kExitFeasible = 0;
constexpr int kExitInfeasible = 1;
constexpr int kExitInputError = 2;
constexpr int kExitBudgetError = 3;

json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw spec_error(path, "cannot open file");
  json doc;
  try {
    in >> doc;
  } catch (const json::parse_error& e) {
    throw spec_error(path, std::string("JSON parse error: ") + e.what());
  }
  return doc;
}

void emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text << "\n";
  } else {
    std::ofstream out(out_path);
    if (!out) throw spec_error(out_path, "cannot open output file");
    out << text << "\n";
  }
}

void apply_cutoff_override(StateSpec& spec, int cutoff) {
  if (cutoff > 0) spec.cutoff = cutoff;
  for (StateSpec& f : spec.factors) apply_cutoff_override(f, cutoff);
}

struct CommonOpts {
  std::string out_path;
  std::string format = "json";
  int cutoff = 0;
  unsigned long long seed = 2026;
  double tolerance = 1e-10;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--out", opts.out_path, "output path (default: stdout)");
  cmd->add_option("--format", opts.format, "output format")->check(CLI::IsMember({"json", "csv"}));
  cmd->add_option("--cutoff", opts.cutoff, "override Fock cutoffs");
  cmd->add_option("--seed", opts.seed, "random seed for randomized suites");
  cmd->add_option("--tolerance", opts.tolerance, "comparison tolerance");
}

// ---- monotones ----

int cmd_monotones(const std::string& spec_path, const CommonOpts& opts) {
  json doc = load_json(spec_path);
  StateSpec spec = parse_state_spec(doc);
  apply_cutoff_override(spec, opts.cutoff);
  BuiltState state = build_state(spec);

  Mat cov = state_covariance(state);
  Mat qfi = state.gaussian_path ? gaussian_qfi(cov) : qfi_matrix(as_density(*state.fock));
  MonotoneReport report = monotone_report(cov, qfi);

  if (opts.format == "csv") {
    std::ostringstream csv;
    csv << "family,index,eigenvalue,partial_sum\n";
    auto rows = [&](const char* family, const Vec& spec_v, const Vec& partial) {
      for (Eigen::Index i = 0; i < spec_v.size(); ++i)
        csv << family << "," << (i + 1) << "," << spec_v(i) << "," << partial(i) << "\n";
    };
    rows("v", report.v, report.v_partial);
    rows("w", report.w, report.w_partial);
    rows("f", report.f, report.f_partial);
    rows("g", report.g, report.g_partial);
    emit(csv.str(), opts.out_path);
  } else {
    json out{
        {"spec", state_spec_to_json(spec)},
        {"path", state.gaussian_path ? "gaussian" : "fock"},
        {"n_modes", cov.rows() / 2},
        {"cov", to_json(cov)},
        {"qfi", to_json(qfi)},
        {"report", to_json(report)},
    };
    if (!state.gaussian_path) out["tail_mass"] = tail_mass_of(*state.fock);
    emit(out.dump(2), opts.out_path);
  }
  return kExitFeasible;
}

// ---- convert ----

int cmd_convert(const std::string& source_path, const std::string& target_path,
                const std::string& regime_name, const CommonOpts& opts) {
  StateSpec source_spec = parse_state_spec(load_json(source_path));
  StateSpec target_spec = parse_state_spec(load_json(target_path));
  if (!is_gaussian_kind(source_spec) || !is_gaussian_kind(target_spec))
    throw spec_error("$.kind", "conversion verdicts are Gaussian-only");

  BuiltState source = build_state(source_spec);
  BuiltState target = build_state(target_spec);
  const Regime regime = regime_name == "p0" ? Regime::p0 : Regime::gpn;

  json out{{"source", state_spec_to_json(source_spec)},
           {"target", state_spec_to_json(target_spec)},
           {"regime", regime_name}};

  ConversionVerdict verdict;
  if (source.gaussian->n_modes() == 1 && target.gaussian->n_modes() == 1) {
    verdict = convertible(*source.gaussian, *target.gaussian, regime, opts.tolerance);
    out["source_measures"] = to_json(n_measures(source.gaussian->cov));
    out["target_measures"] = to_json(n_measures(target.gaussian->cov));
  } else {
    // multi-mode conversion is decided for pure states by their squeezing
    Vec s_source, s_target;
    try {
      s_source = squeezing_spectrum(*source.gaussian);
      s_target = squeezing_spectrum(*target.gaussian);
    } catch (const std::invalid_argument& e) {
      throw spec_error("$", std::string("multi-mode conversion needs pure states: ") + e.what());
    }
    if (regime == Regime::p0)
      throw spec_error("$", "multi-mode verdicts are available for the gpn regime only");
    verdict = pure_convertible(s_source, s_target, opts.tolerance);
    out["source_squeezing"] = to_json(s_source);
    out["target_squeezing"] = to_json(s_target);
  }
  out["verdict"] = to_json(verdict);
  emit(out.dump(2), opts.out_path);
  return verdict.feasible ? kExitFeasible : kExitInfeasible;
}

// ---- region ----

int cmd_region(const std::string& source_path, int grid, double v_plus_max, const CommonOpts& opts) {
  StateSpec spec = parse_state_spec(load_json(source_path));
  if (!is_gaussian_kind(spec)) throw spec_error("$.kind", "region sweeps are Gaussian-only");
  BuiltState source = build_state(spec);
  if (source.gaussian->n_modes() != 1)
    throw spec_error("$", "region sweeps need a single-mode source");

  std::ostringstream csv;
  csv << "v_plus,v_minus,reachable_p0,reachable_gpn\n";
  for (int i = 0; i < grid; ++i) {
    const double vp = 0.05 + (v_plus_max - 0.05) * i / (grid - 1);
    for (int j = 0; j < grid; ++j) {
      const double vm = 0.05 + (v_plus_max - 0.05) * j / (grid - 1);
      if (vm > vp || vp * vm < 0.25) continue;  // unphysical or unsorted
      Mat cand = Mat::Zero(2, 2);
      cand(0, 0) = vp;
      cand(1, 1) = vm;
      GaussianState target = GaussianState::from_cov(cand);
      const bool p0 = convertible(*source.gaussian, target, Regime::p0, opts.tolerance).feasible;
      const bool gpn = convertible(*source.gaussian, target, Regime::gpn, opts.tolerance).feasible;
      csv << vp << "," << vm << "," << (p0 ? 1 : 0) << "," << (gpn ? 1 : 0) << "\n";
    }
  }
  emit(csv.str(), opts.out_path);
  return kExitFeasible;
}

// ---- protocol ----

json branch_report(const BranchOutcome& branch) {
  json b{{"record", branch.record}, {"probability", branch.probability}, {"overflow", branch.overflow}};
  if (branch.post) {
    const bool pure = std::holds_alternative<FockPure>(*branch.post);
    b["pure"] = pure;
    b["n_modes"] = n_modes_of(*branch.post);
    QuadratureMoments m = quadrature_moments(*branch.post);
    b["mean"] = to_json(m.mean);
    b["v"] = to_json(v_spectrum(m.cov));
    b["w"] = to_json(w_spectrum(m.cov));
    if (as_density(*branch.post).dim() <= 512) {
      Mat qfi = qfi_matrix(as_density(*branch.post));
      b["f"] = to_json(f_spectrum(qfi));
      b["g"] = to_json(g_spectrum(qfi));
    }
  }
  return b;
}

json monotonicity_report_json(const MonotonicityReport& report) {
  json branches = json::array();
  for (const auto& b : report.branches)
    branches.push_back(json{{"record", b.record},
                            {"probability", b.probability},
                            {"worst_margin", b.worst_margin},
                            {"skipped_mixed", b.skipped_mixed},
                            {"ok", b.ok}});
  json out{{"branches", branches},
           {"ensemble_evaluated", report.ensemble_evaluated},
           {"ensemble_margin", report.ensemble_margin},
           {"ensemble_ok", report.ensemble_ok},
           {"all_ok", report.all_ok}};
  if (report.eigenwise_evaluated) out["eigenwise_margin"] = report.eigenwise_margin;
  return out;
}

int cmd_protocol(const std::string& state_path, const std::string& protocol_path,
                 const CommonOpts& opts) {
  StateSpec spec = parse_state_spec(load_json(state_path));
  apply_cutoff_override(spec, opts.cutoff);
  ProtocolDocument protocol = parse_protocol(load_json(protocol_path));

  json out{{"protocol", protocol.name.empty() ? protocol_path : protocol.name},
           {"domain", protocol.domain},
           {"state", state_spec_to_json(spec)}};

  if (protocol.domain == "gaussian") {
    BuiltState state = build_state(spec);
    if (!state.gaussian_path || state.gaussian->n_modes() != 1)
      throw spec_error("$", "gaussian protocols need a single-mode Gaussian state spec");
    Eigen::SelfAdjointEigenSolver<Mat> es(state.gaussian->cov);
    NMeasures before = n_measures(state.gaussian->cov);
    HomodyneFeedforwardResult r =
        homodyne_feedforward(es.eigenvalues()(1), es.eigenvalues()(0), protocol.eta);
    Mat after_cov = Mat::Zero(2, 2);
    after_cov(0, 0) = r.v_plus;
    after_cov(1, 1) = r.v_minus;
    out["homodyne_feedforward"] = json{{"eta", protocol.eta},
                                       {"gamma", r.gamma},
                                       {"v_plus", r.v_plus},
                                       {"v_minus", r.v_minus},
                                       {"measures_before", to_json(before)},
                                       {"measures_after", to_json(n_measures(after_cov))}};
    emit(out.dump(2), opts.out_path);
    return kExitFeasible;
  }

  BuiltState built = build_state(spec);
  if (built.gaussian_path)
    throw spec_error("$", "fock protocols need a Fock state spec");
  auto branches = run_instrument(*built.fock, *protocol.step);

  json branch_docs = json::array();
  for (const auto& b : branches) branch_docs.push_back(branch_report(b));
  out["branches"] = branch_docs;

  json verdicts = json::object();
  const bool pure_input = std::holds_alternative<FockPure>(*built.fock);
  if (pure_input) {
    verdicts["v"] = monotonicity_report_json(
        check_monotonicity(*built.fock, *protocol.step, MonotoneFamily::v, opts.tolerance * 100));
    verdicts["w"] = monotonicity_report_json(
        check_monotonicity(*built.fock, *protocol.step, MonotoneFamily::w, opts.tolerance * 100));
  }
  if (as_density(*built.fock).dim() <= 512) {
    verdicts["f"] = monotonicity_report_json(
        check_monotonicity(*built.fock, *protocol.step, MonotoneFamily::f, opts.tolerance * 100));
    verdicts["g"] = monotonicity_report_json(
        check_monotonicity(*built.fock, *protocol.step, MonotoneFamily::g, opts.tolerance * 100));
  }
  out["monotonicity"] = verdicts;
  emit(out.dump(2), opts.out_path);
  return kExitFeasible;
}

// ---- selftest ----

int cmd_selftest(const std::string& only, const CommonOpts& opts) {
  auto results = run_acceptance_suite(opts.seed, only);
  json doc = json::array();
  int failures = 0;
  for (const auto& r : results) {
    std::cout << "[" << (r.passed ? "PASS" : "FAIL") << "] " << r.name << ": " << r.details << "\n";
    doc.push_back(json{{"name", r.name}, {"passed", r.passed}, {"details", r.details}});
    if (!r.passed) ++failures;
  }
  std::cout << results.size() << " criteria, " << failures << " failed\n";
  if (!opts.out_path.empty())
    emit(json{{"seed", opts.seed}, {"criteria", doc}, {"failures", failures}}.dump(2),
         opts.out_path);
  return failures == 0 ? kExitFeasible : kExitInfeasible;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"continuous-variable nonclassicality toolkit"};
  app.require_subcommand(1);

  CommonOpts opts;
  std::string spec_path, source_path, target_path, state_path, protocol_path;
  std::string regime = "p0", only;
  int grid = 60;
  double v_plus_max = 3.0;

  CLI::App* monotones = app.add_subcommand("monotones", "monotone spectra and partial sums");
  monotones->add_option("--spec", spec_path, "state spec JSON")->required();
  add_common(monotones, opts);

  CLI::App* convert = app.add_subcommand("convert", "Gaussian conversion verdict");
  convert->add_option("--source", source_path, "source state spec JSON")->required();
  convert->add_option("--target", target_path, "target state spec JSON")->required();
  convert->add_option("--regime", regime, "free-operation regime")
      ->check(CLI::IsMember({"p0", "gpn"}));
  add_common(convert, opts);

  CLI::App* region = app.add_subcommand("region", "achievable-region sweep (CSV)");
  region->add_option("--source", source_path, "source state spec JSON")->required();
  region->add_option("--grid", grid, "grid points per axis");
  region->add_option("--vmax", v_plus_max, "upper end of the eigenvalue grid");
  add_common(region, opts);

  CLI::App* protocol = app.add_subcommand("protocol", "run a protocol on a state");
  protocol->add_option("--state", state_path, "state spec JSON")->required();
  protocol->add_option("--protocol", protocol_path, "protocol JSON")->required();
  add_common(protocol, opts);

  CLI::App* selftest = app.add_subcommand("selftest", "run the acceptance criteria");
  selftest->add_option("--only", only, "filter criteria by substring");
  add_common(selftest, opts);

  CLI11_PARSE(app, argc, argv);

  try {
    if (monotones->parsed()) return cmd_monotones(spec_path, opts);
    if (convert->parsed()) return cmd_convert(source_path, target_path, regime, opts);
    if (region->parsed()) return cmd_region(source_path, grid, v_plus_max, opts);
    if (protocol->parsed()) return cmd_protocol(state_path, protocol_path, opts);
    if (selftest->parsed()) return cmd_selftest(only, opts);
  } catch (const truncation_error& e) {
    std::cerr << "numerical budget error: " << e.what() << "\n";
    return kExitBudgetError;
  } catch (const spec_error& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInputError;
  }
  return kExitInputError;
}
