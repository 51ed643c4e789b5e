#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "cvnc/fock.hpp"
#include "cvnc/gaussian.hpp"
#include "cvnc/monotones.hpp"
#include "cvnc/protocols.hpp"
#include "cvnc/selftest.hpp"
#include "cvnc/statespec.hpp"
#include "cvnc/symplectic.hpp"

namespace py = pybind11;
using namespace cvnc;

namespace {

// FockState is std::variant, which pybind cannot default-construct; convert
// at the boundary by hand.
FockState state_from_obj(const py::object& obj) {
  try {
    return FockState(obj.cast<FockPure>());
  } catch (const py::cast_error&) {
    return FockState(obj.cast<FockDensity>());
  }
}

py::object state_to_obj(const FockState& state) {
  return std::visit([](const auto& s) { return py::cast(s); }, state);
}

Regime regime_from_string(const std::string& name) {
  if (name == "p0") return Regime::p0;
  if (name == "gpn") return Regime::gpn;
  throw std::invalid_argument("regime must be 'p0' or 'gpn'");
}

py::dict verdict_to_dict(const ConversionVerdict& v) {
  py::list certs;
  for (const Certificate& c : v.certificates)
    certs.append(py::make_tuple(c.monotone, c.source_value, c.target_value));
  py::dict out;
  out["feasible"] = v.feasible;
  out["regime"] = v.regime == Regime::p0 ? "p0" : "gpn";
  out["certificates"] = certs;
  return out;
}

}  // namespace

PYBIND11_MODULE(_cvnc, m) {
  m.doc() = "Phase-space nonclassicality monotones and passive-linear instruments";

  py::register_exception<truncation_error>(m, "TruncationError");

  // ---- symplectic ----
  m.def("symplectic_form", &symplectic_form, py::arg("n_modes"));
  m.def("phase_rotation", &phase_rotation, py::arg("theta"));
  m.def("mode_unitary_to_orthosymplectic", &mode_unitary_to_orthosymplectic, py::arg("u"));
  m.def("orthosymplectic_to_mode_unitary", &orthosymplectic_to_mode_unitary, py::arg("r"));
  m.def("beam_splitter_unitary", &beam_splitter_unitary, py::arg("eta"), py::arg("i"),
        py::arg("j"), py::arg("n_modes"));
  m.def("positive_part", &positive_part, py::arg("m"));
  m.def("complex_halve", &complex_halve, py::arg("m"), py::arg("tol") = 1e-9);
  m.def("complex_double", &complex_double, py::arg("m"));
  m.def("direct_sum", &direct_sum, py::arg("a"), py::arg("b"));

  py::class_<WilliamsonResult>(m, "WilliamsonResult")
      .def_readonly("s", &WilliamsonResult::s)
      .def_readonly("d", &WilliamsonResult::d)
      .def_readonly("uncertainty_ok", &WilliamsonResult::uncertainty_ok)
      .def("d_matrix", &WilliamsonResult::d_matrix);
  m.def("williamson_decompose", &williamson_decompose, py::arg("v"),
        py::arg("uncertainty_tol") = 1e-9);

  py::class_<CsDecomposition>(m, "CsDecomposition")
      .def_readonly("x", &CsDecomposition::x)
      .def_readonly("d", &CsDecomposition::d)
      .def_readonly("y", &CsDecomposition::y)
      .def_readonly("cosines", &CsDecomposition::cosines)
      .def_readonly("b", &CsDecomposition::b);
  m.def("cs_decompose", &cs_decompose, py::arg("u"), py::arg("n_a"), py::arg("n_b"),
        py::arg("n_c"), py::arg("n_d"));

  // ---- monotones ----
  m.def("v_spectrum", &v_spectrum, py::arg("cov"));
  m.def("w_spectrum", &w_spectrum, py::arg("cov"));
  m.def("f_spectrum", &f_spectrum, py::arg("qfi"));
  m.def("g_spectrum", &g_spectrum, py::arg("qfi"));
  m.def("partial_sums", &partial_sums, py::arg("spectrum"));
  m.def("vidal_probability_bound", &vidal_probability_bound, py::arg("source"), py::arg("target"));
  m.def(
      "monotone_report",
      [](const Mat& cov, const Mat& qfi) {
        MonotoneReport r = monotone_report(cov, qfi);
        py::dict out;
        out["v"] = r.v;
        out["w"] = r.w;
        out["f"] = r.f;
        out["g"] = r.g;
        out["v_partial"] = r.v_partial;
        out["w_partial"] = r.w_partial;
        out["f_partial"] = r.f_partial;
        out["g_partial"] = r.g_partial;
        return out;
      },
      py::arg("cov"), py::arg("qfi"));

  // ---- gaussian ----
  py::class_<GaussianState>(m, "GaussianState")
      .def(py::init([](const Vec& mean, const Mat& cov) {
             return GaussianState{mean, cov};
           }),
           py::arg("mean"), py::arg("cov"))
      .def_static("vacuum", &GaussianState::vacuum, py::arg("n_modes"))
      .def_static("from_cov", &GaussianState::from_cov, py::arg("cov"))
      .def_readwrite("mean", &GaussianState::mean)
      .def_readwrite("cov", &GaussianState::cov)
      .def_property_readonly("n_modes", &GaussianState::n_modes);

  m.def("is_physical", &is_physical, py::arg("cov"), py::arg("tol") = 1e-9);
  m.def("is_classical_gaussian", &is_classical_gaussian, py::arg("cov"), py::arg("tol") = 1e-12);
  m.def("gaussian_qfi", &gaussian_qfi, py::arg("cov"));
  m.def(
      "n_measures",
      [](const Mat& cov) {
        NMeasures n = n_measures(cov);
        py::dict out;
        out["n1"] = n.n1;
        out["n2"] = n.n2;
        out["n3"] = n.n3;
        out["v_plus"] = n.v_plus;
        out["v_minus"] = n.v_minus;
        return out;
      },
      py::arg("cov"));
  m.def(
      "convertible",
      [](const GaussianState& source, const GaussianState& target, const std::string& regime,
         double tol) {
        return verdict_to_dict(convertible(source, target, regime_from_string(regime), tol));
      },
      py::arg("source"), py::arg("target"), py::arg("regime"), py::arg("tol") = 1e-10);
  m.def(
      "pure_convertible",
      [](const Vec& s_source, const Vec& s_target, double tol) {
        return verdict_to_dict(pure_convertible(s_source, s_target, tol));
      },
      py::arg("s_source"), py::arg("s_target"), py::arg("tol") = 1e-10);
  m.def("squeezing_spectrum", &squeezing_spectrum, py::arg("state"), py::arg("purity_tol") = 1e-6);
  m.def(
      "p0_achievable_region",
      [](double vp, double vm, double yp, double ym, double tp, double tm, double tol) {
        RegionMembership r = p0_achievable_region(vp, vm, yp, ym, tp, tm, tol);
        return py::make_tuple(r.inside, r.margin);
      },
      py::arg("v_plus"), py::arg("v_minus"), py::arg("y_plus"), py::arg("y_minus"),
      py::arg("v_plus_prime"), py::arg("v_minus_prime"), py::arg("tol") = 1e-10);
  m.def("condition_on_gaussian_measurement", &condition_on_gaussian_measurement, py::arg("a"),
        py::arg("b"), py::arg("c"), py::arg("z"));
  m.def("conditional_mean", &conditional_mean, py::arg("mean_a"), py::arg("mean_b"), py::arg("b"),
        py::arg("c"), py::arg("z"), py::arg("outcome"));
  m.def(
      "homodyne_feedforward",
      [](double v_plus, double v_minus, double eta) {
        HomodyneFeedforwardResult r = homodyne_feedforward(v_plus, v_minus, eta);
        return py::make_tuple(r.v_plus, r.v_minus, r.gamma);
      },
      py::arg("v_plus"), py::arg("v_minus"), py::arg("eta"));
  m.def("gaussian_fg_spectra", &gaussian_fg_spectra, py::arg("cov"));
  m.def("apply_beamsplitter_with_ancilla", &apply_beamsplitter_with_ancilla, py::arg("v"),
        py::arg("y"), py::arg("eta"), py::arg("r_s"), py::arg("r_a"));

  // ---- fock ----
  py::class_<FockPure>(m, "FockPure")
      .def(py::init<int, int, CVec>(), py::arg("n_modes"), py::arg("cutoff"), py::arg("amplitudes"))
      .def_property_readonly("n_modes", &FockPure::n_modes)
      .def_property_readonly("cutoff", &FockPure::cutoff)
      .def_property_readonly("amplitudes",
                             [](const FockPure& s) { return CVec(s.amplitudes()); })
      .def_property_readonly("tail_mass", &FockPure::tail_mass)
      .def("amplitude", &FockPure::amplitude, py::arg("levels"));

  py::class_<FockDensity>(m, "FockDensity")
      .def(py::init<int, int, CMat>(), py::arg("n_modes"), py::arg("cutoff"), py::arg("matrix"))
      .def(py::init<const FockPure&>(), py::arg("pure"))
      .def_property_readonly("n_modes", &FockDensity::n_modes)
      .def_property_readonly("cutoff", &FockDensity::cutoff)
      .def_property_readonly("matrix", [](const FockDensity& s) { return CMat(s.matrix()); })
      .def_property_readonly("trace", &FockDensity::trace)
      .def_property_readonly("tail_mass", &FockDensity::tail_mass);

  m.def("coherent_state", &coherent_state, py::arg("alphas"), py::arg("cutoff"),
        py::arg("tail_budget") = kDefaultTruncationBudget);
  m.def("suggested_cutoff", &suggested_cutoff, py::arg("alpha_magnitude"));
  m.def("cat_state", &cat_state, py::arg("alpha"), py::arg("sign"), py::arg("cutoff"),
        py::arg("tail_budget") = kDefaultTruncationBudget);
  m.def("fock_superposition", &fock_superposition, py::arg("coeffs"), py::arg("cutoff"));
  m.def("thermal_minus_vacuum", &thermal_minus_vacuum, py::arg("p"), py::arg("cutoff"),
        py::arg("tail_budget") = 1e-12);
  m.def("thermal_state", &thermal_state, py::arg("d"), py::arg("cutoff"),
        py::arg("tail_budget") = 1e-12);
  m.def("tensor", py::overload_cast<const FockPure&, const FockPure&>(&tensor), py::arg("a"),
        py::arg("b"));
  m.def("tensor_density", py::overload_cast<const FockDensity&, const FockDensity&>(&tensor),
        py::arg("a"), py::arg("b"));
  m.def("apply_mode_unitary",
        py::overload_cast<const FockPure&, const CMat&>(&apply_mode_unitary), py::arg("state"),
        py::arg("u"));
  m.def("apply_mode_unitary_density",
        py::overload_cast<const FockDensity&, const CMat&>(&apply_mode_unitary), py::arg("state"),
        py::arg("u"));
  m.def("apply_displacement",
        py::overload_cast<const FockPure&, const std::vector<cplx>&, double>(&apply_displacement),
        py::arg("state"), py::arg("alphas"), py::arg("tail_budget") = 1e-6);
  m.def("apply_displacement_density",
        py::overload_cast<const FockDensity&, const std::vector<cplx>&, double>(&apply_displacement),
        py::arg("state"), py::arg("alphas"), py::arg("tail_budget") = 1e-6);
  m.def("displacement_operator", &displacement_operator, py::arg("alpha"), py::arg("cutoff"));
  m.def("squeeze_operator", &squeeze_operator, py::arg("r"), py::arg("cutoff"));
  m.def(
      "quadrature_moments",
      [](const py::object& state) {
        QuadratureMoments mm = quadrature_moments(state_from_obj(state));
        return py::make_tuple(mm.mean, mm.cov);
      },
      py::arg("state"));
  m.def("qfi_matrix", &qfi_matrix, py::arg("rho"));
  m.def(
      "measure_photon_number",
      [](const py::object& state, const std::vector<int>& modes) {
        py::list out;
        for (CountOutcome& oc : measure_photon_number(state_from_obj(state), modes)) {
          py::dict entry;
          entry["counts"] = oc.counts;
          entry["probability"] = oc.probability;
          entry["post"] = oc.post ? state_to_obj(*oc.post) : py::none().cast<py::object>();
          out.append(entry);
        }
        return out;
      },
      py::arg("state"), py::arg("modes"));
  m.def(
      "project_onto",
      [](const py::object& state, int mode, const std::string& kind, cplx alpha, int level) {
        ProjectionTarget target;
        if (kind == "vacuum") target = ProjectionTarget::make_vacuum();
        else if (kind == "coherent") target = ProjectionTarget::make_coherent(alpha);
        else if (kind == "fock") target = ProjectionTarget::make_fock(level);
        else throw std::invalid_argument("projection kind must be vacuum, coherent or fock");
        ProjectionResult r = project_onto(state_from_obj(state), mode, target);
        return py::make_tuple(r.probability,
                              r.post ? state_to_obj(*r.post) : py::none().cast<py::object>());
      },
      py::arg("state"), py::arg("mode"), py::arg("kind") = "vacuum",
      py::arg("alpha") = cplx(0.0, 0.0), py::arg("level") = 0);
  m.def("partial_trace", &partial_trace, py::arg("rho"), py::arg("modes_to_trace"));
  m.def(
      "overlap_bound_check",
      [](const FockPure& state) {
        OverlapBound b = overlap_bound_check(state);
        return py::make_tuple(b.lhs, b.rhs, b.holds);
      },
      py::arg("state"));

  // ---- protocols ----
  m.def(
      "cat_growth_protocol",
      [](cplx alpha, int cutoff) {
        CatGrowthReport r = cat_growth_protocol(alpha, cutoff);
        py::dict out;
        out["p_success"] = r.p_success;
        out["output"] = r.output;
        out["w1_before"] = r.w1_before;
        out["w1_after"] = r.w1_after;
        out["slack"] = r.slack;
        out["bound_respected"] = r.bound_respected;
        return out;
      },
      py::arg("alpha"), py::arg("cutoff"));
  m.def(
      "fit_coherent_map",
      [](const std::vector<std::pair<CVec, CVec>>& samples) {
        KrausFit fit = fit_coherent_map(samples);
        py::dict out;
        out["m"] = fit.m;
        out["delta"] = fit.delta;
        out["max_singular_value"] = fit.max_singular_value;
        out["residual"] = fit.residual;
        return out;
      },
      py::arg("samples"));
  m.def(
      "run_protocol",
      [](const std::string& state_spec_json, const std::string& protocol_json) {
        StateSpec spec = parse_state_spec(json::parse(state_spec_json));
        ProtocolDocument protocol = parse_protocol(json::parse(protocol_json));
        if (protocol.domain != "fock")
          throw std::invalid_argument("run_protocol handles fock-domain protocols");
        BuiltState built = build_state(spec);
        if (built.gaussian_path)
          throw std::invalid_argument("run_protocol needs a Fock state spec");
        py::list out;
        for (BranchOutcome& b : run_instrument(*built.fock, *protocol.step)) {
          py::dict entry;
          entry["record"] = b.record;
          entry["probability"] = b.probability;
          entry["overflow"] = b.overflow;
          entry["post"] = b.post ? state_to_obj(*b.post) : py::none().cast<py::object>();
          out.append(entry);
        }
        return out;
      },
      py::arg("state_spec_json"), py::arg("protocol_json"));

  // ---- acceptance suite ----
  m.def(
      "run_acceptance_suite",
      [](unsigned long long seed, const std::string& only) {
        py::list out;
        for (const CriterionResult& r : run_acceptance_suite(seed, only))
          out.append(py::make_tuple(r.name, r.passed, r.details));
        return out;
      },
      py::arg("seed") = 2026, py::arg("only") = "");
}
