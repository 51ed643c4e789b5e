#include "cvnc/statespec.hpp"

#include <cmath>

#include "cvnc/symplectic.hpp"

namespace cvnc {

namespace {

const json& expect_field(const json& doc, const char* key, const std::string& path) {
  if (!doc.is_object() || !doc.contains(key))
    throw spec_error(path + "." + key, "required field is missing");
  return doc.at(key);
}

double expect_number(const json& node, const std::string& path) {
  if (!node.is_number()) throw spec_error(path, "expected a number");
  return node.get<double>();
}

int expect_int(const json& node, const std::string& path) {
  if (!node.is_number_integer()) throw spec_error(path, "expected an integer");
  return node.get<int>();
}

cplx expect_complex(const json& node, const std::string& path) {
  if (!node.is_array() || node.size() != 2)
    throw spec_error(path, "complex numbers are [re, im] pairs");
  return cplx(expect_number(node[0], path + "[0]"), expect_number(node[1], path + "[1]"));
}

json complex_to_json(cplx z) { return json::array({z.real(), z.imag()}); }

Mat expect_matrix(const json& node, const std::string& path) {
  const int rows = expect_int(expect_field(node, "rows", path), path + ".rows");
  const int cols = expect_int(expect_field(node, "cols", path), path + ".cols");
  const json& data = expect_field(node, "data", path);
  if (!data.is_array() || static_cast<int>(data.size()) != rows * cols)
    throw spec_error(path + ".data", "row-major array of rows*cols numbers expected");
  Mat m(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c)
      m(r, c) = expect_number(data[r * cols + c], path + ".data");
  return m;
}

json matrix_to_json(const Mat& m) {
  json data = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) data.push_back(m(r, c));
  return json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", data}};
}

CMat expect_complex_matrix(const json& node, const std::string& path) {
  const int rows = expect_int(expect_field(node, "rows", path), path + ".rows");
  const int cols = expect_int(expect_field(node, "cols", path), path + ".cols");
  const json& re = expect_field(node, "re", path);
  const json& im = expect_field(node, "im", path);
  if (!re.is_array() || !im.is_array() || static_cast<int>(re.size()) != rows * cols ||
      static_cast<int>(im.size()) != rows * cols)
    throw spec_error(path, "re/im must be row-major arrays of rows*cols numbers");
  CMat m(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c)
      m(r, c) = cplx(expect_number(re[r * cols + c], path + ".re"),
                     expect_number(im[r * cols + c], path + ".im"));
  return m;
}

json complex_matrix_to_json(const CMat& m) {
  json re = json::array(), im = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      re.push_back(m(r, c).real());
      im.push_back(m(r, c).imag());
    }
  return json{{"rows", m.rows()}, {"cols", m.cols()}, {"re", re}, {"im", im}};
}

}  // namespace

StateSpec parse_state_spec(const json& doc, const std::string& path) {
  StateSpec spec;
  const json& kind = expect_field(doc, "kind", path);
  if (!kind.is_string()) throw spec_error(path + ".kind", "expected a string");
  spec.kind = kind.get<std::string>();

  if (doc.contains("cutoff")) spec.cutoff = expect_int(doc["cutoff"], path + ".cutoff");

  if (spec.kind == "coherent") {
    const json& alphas = expect_field(doc, "alphas", path);
    if (!alphas.is_array() || alphas.empty())
      throw spec_error(path + ".alphas", "expected a nonempty array of [re, im] pairs");
    for (std::size_t i = 0; i < alphas.size(); ++i)
      spec.alphas.push_back(expect_complex(alphas[i], path + ".alphas[" + std::to_string(i) + "]"));
  } else if (spec.kind == "cat") {
    spec.alpha = expect_complex(expect_field(doc, "alpha", path), path + ".alpha");
    spec.sign = expect_int(expect_field(doc, "sign", path), path + ".sign");
    if (spec.sign != 1 && spec.sign != -1) throw spec_error(path + ".sign", "must be +1 or -1");
  } else if (spec.kind == "fock_superposition") {
    const json& terms = expect_field(doc, "terms", path);
    if (!terms.is_array() || terms.empty())
      throw spec_error(path + ".terms", "expected a nonempty array");
    for (std::size_t i = 0; i < terms.size(); ++i) {
      const std::string tpath = path + ".terms[" + std::to_string(i) + "]";
      const json& t = terms[i];
      spec.terms.push_back({expect_int(expect_field(t, "level", tpath), tpath + ".level"),
                            expect_complex(expect_field(t, "amplitude", tpath), tpath + ".amplitude")});
    }
  } else if (spec.kind == "squeezed_gaussian") {
    spec.s = expect_number(expect_field(doc, "s", path), path + ".s");
    if (spec.s < 1.0) throw spec_error(path + ".s", "squeezing parameter must be >= 1");
    if (doc.contains("theta")) spec.theta = expect_number(doc["theta"], path + ".theta");
  } else if (spec.kind == "thermal") {
    spec.d = expect_number(expect_field(doc, "d", path), path + ".d");
    if (spec.d < 0.5) throw spec_error(path + ".d", "symplectic eigenvalue must be >= 1/2");
  } else if (spec.kind == "thermal_minus_vacuum") {
    spec.p = expect_number(expect_field(doc, "p", path), path + ".p");
    if (spec.p <= 0.0 || spec.p >= 1.0) throw spec_error(path + ".p", "p must lie in (0,1)");
  } else if (spec.kind == "gaussian_raw") {
    spec.cov = expect_matrix(expect_field(doc, "cov", path), path + ".cov");
    if (spec.cov.rows() != spec.cov.cols() || spec.cov.rows() % 2 != 0)
      throw spec_error(path + ".cov", "covariance matrix must be 2n x 2n");
  } else if (spec.kind == "tensor_product") {
    const json& factors = expect_field(doc, "factors", path);
    if (!factors.is_array() || factors.size() < 2)
      throw spec_error(path + ".factors", "expected at least two factors");
    for (std::size_t i = 0; i < factors.size(); ++i)
      spec.factors.push_back(
          parse_state_spec(factors[i], path + ".factors[" + std::to_string(i) + "]"));
  } else {
    throw spec_error(path + ".kind", "unknown state kind '" + spec.kind + "'");
  }

  if (doc.contains("mean")) {
    const json& mean = doc["mean"];
    if (!mean.is_array()) throw spec_error(path + ".mean", "expected an array");
    spec.mean.resize(mean.size());
    for (std::size_t i = 0; i < mean.size(); ++i)
      spec.mean(static_cast<Eigen::Index>(i)) =
          expect_number(mean[i], path + ".mean[" + std::to_string(i) + "]");
  }
  return spec;
}

json state_spec_to_json(const StateSpec& spec) {
  json doc{{"kind", spec.kind}};
  if (spec.cutoff > 0) doc["cutoff"] = spec.cutoff;
  if (spec.kind == "coherent") {
    json alphas = json::array();
    for (cplx a : spec.alphas) alphas.push_back(complex_to_json(a));
    doc["alphas"] = alphas;
  } else if (spec.kind == "cat") {
    doc["alpha"] = complex_to_json(spec.alpha);
    doc["sign"] = spec.sign;
  } else if (spec.kind == "fock_superposition") {
    json terms = json::array();
    for (const auto& [level, amp] : spec.terms)
      terms.push_back(json{{"level", level}, {"amplitude", complex_to_json(amp)}});
    doc["terms"] = terms;
  } else if (spec.kind == "squeezed_gaussian") {
    doc["s"] = spec.s;
    if (spec.theta != 0.0) doc["theta"] = spec.theta;
  } else if (spec.kind == "thermal") {
    doc["d"] = spec.d;
  } else if (spec.kind == "thermal_minus_vacuum") {
    doc["p"] = spec.p;
  } else if (spec.kind == "gaussian_raw") {
    doc["cov"] = matrix_to_json(spec.cov);
  } else if (spec.kind == "tensor_product") {
    json factors = json::array();
    for (const StateSpec& f : spec.factors) factors.push_back(state_spec_to_json(f));
    doc["factors"] = factors;
  }
  if (spec.mean.size() > 0) {
    json mean = json::array();
    for (Eigen::Index i = 0; i < spec.mean.size(); ++i) mean.push_back(spec.mean(i));
    doc["mean"] = mean;
  }
  return doc;
}

bool is_gaussian_kind(const StateSpec& spec) {
  if (spec.kind == "squeezed_gaussian" || spec.kind == "thermal" || spec.kind == "gaussian_raw")
    return true;
  if (spec.kind == "tensor_product") {
    for (const StateSpec& f : spec.factors)
      if (!is_gaussian_kind(f)) return false;
    return true;
  }
  return false;
}

namespace {

int pick_cutoff(const StateSpec& spec) {
  if (spec.cutoff > 0) return spec.cutoff;
  if (spec.kind == "coherent") {
    double worst = 0.0;
    for (cplx a : spec.alphas) worst = std::max(worst, std::abs(a));
    return suggested_cutoff(worst);
  }
  if (spec.kind == "cat") return suggested_cutoff(std::abs(spec.alpha));
  if (spec.kind == "fock_superposition") {
    int top = 0;
    for (const auto& [level, amp] : spec.terms) top = std::max(top, level);
    return top + 1;
  }
  if (spec.kind == "thermal_minus_vacuum") {
    return std::max(8, static_cast<int>(std::ceil(std::log(1e-12) / std::log(spec.p))) + 2);
  }
  return 16;
}

}  // namespace

BuiltState build_state(const StateSpec& spec, double trunc_budget) {
  BuiltState out;
  out.gaussian_path = is_gaussian_kind(spec);

  if (out.gaussian_path) {
    GaussianState g;
    if (spec.kind == "squeezed_gaussian") {
      Mat v = Mat::Zero(2, 2);
      v(0, 0) = 0.5 * spec.s;
      v(1, 1) = 0.5 / spec.s;
      Mat r = phase_rotation(spec.theta);
      g.cov = r * v * r.transpose();
      g.mean = Vec::Zero(2);
    } else if (spec.kind == "thermal") {
      g.cov = spec.d * Mat::Identity(2, 2);
      g.mean = Vec::Zero(2);
    } else if (spec.kind == "gaussian_raw") {
      g.cov = spec.cov;
      g.mean = Vec::Zero(spec.cov.rows());
      require_physical(g.cov);
    } else {  // tensor_product
      g.cov = Mat::Zero(0, 0);
      for (const StateSpec& f : spec.factors) {
        BuiltState part = build_state(f, trunc_budget);
        g.cov = g.cov.size() == 0 ? part.gaussian->cov : direct_sum(g.cov, part.gaussian->cov);
      }
      g.mean = Vec::Zero(g.cov.rows());
    }
    if (spec.mean.size() > 0) {
      require(spec.mean.size() == g.cov.rows(), "mean vector length must be 2n");
      g.mean = spec.mean;
    }
    out.gaussian = std::move(g);
    return out;
  }

  if (spec.kind == "coherent") {
    out.fock = FockState(coherent_state(spec.alphas, pick_cutoff(spec), trunc_budget));
  } else if (spec.kind == "cat") {
    out.fock = FockState(cat_state(spec.alpha, spec.sign, pick_cutoff(spec), trunc_budget));
  } else if (spec.kind == "fock_superposition") {
    out.fock = FockState(fock_superposition(spec.terms, pick_cutoff(spec)));
  } else if (spec.kind == "thermal_minus_vacuum") {
    out.fock = FockState(thermal_minus_vacuum(spec.p, pick_cutoff(spec)));
  } else {  // tensor_product over fock factors
    int cutoff = spec.cutoff;
    if (cutoff <= 0)
      for (const StateSpec& f : spec.factors) cutoff = std::max(cutoff, pick_cutoff(f));
    bool any_mixed = false;
    std::vector<FockState> parts;
    for (StateSpec f : spec.factors) {
      if (is_gaussian_kind(f))
        throw spec_error("$.factors",
                         "tensor_product cannot mix Gaussian and Fock factors; use gaussian_raw "
                         "with a direct-sum covariance or all-Fock factors");
      f.cutoff = cutoff;
      BuiltState part = build_state(f, trunc_budget);
      any_mixed = any_mixed || std::holds_alternative<FockDensity>(*part.fock);
      parts.push_back(std::move(*part.fock));
    }
    if (any_mixed) {
      FockDensity acc = as_density(parts[0]);
      for (std::size_t i = 1; i < parts.size(); ++i) acc = tensor(acc, as_density(parts[i]));
      out.fock = FockState(std::move(acc));
    } else {
      FockPure acc = std::get<FockPure>(parts[0]);
      for (std::size_t i = 1; i < parts.size(); ++i) acc = tensor(acc, std::get<FockPure>(parts[i]));
      out.fock = FockState(std::move(acc));
    }
  }
  return out;
}

Mat state_covariance(const BuiltState& state) {
  if (state.gaussian_path) return state.gaussian->cov;
  return quadrature_moments(*state.fock).cov;
}

// ---------------------------------------------------------------------------
// Protocol documents
// ---------------------------------------------------------------------------

namespace {

CMat parse_unitary(const json& node, const std::string& path) {
  const int dim = expect_int(expect_field(node, "dim", path), path + ".dim");
  if (dim < 1) throw spec_error(path + ".dim", "dimension must be positive");
  const json& elements = expect_field(node, "elements", path);
  if (!elements.is_array()) throw spec_error(path + ".elements", "expected an array");
  CMat u = CMat::Identity(dim, dim);
  for (std::size_t i = 0; i < elements.size(); ++i) {
    const std::string epath = path + ".elements[" + std::to_string(i) + "]";
    const json& el = elements[i];
    const json& type = expect_field(el, "type", epath);
    if (!type.is_string()) throw spec_error(epath + ".type", "expected a string");
    const std::string t = type.get<std::string>();
    CMat factor;
    if (t == "beamsplitter") {
      const json& modes = expect_field(el, "modes", epath);
      if (!modes.is_array() || modes.size() != 2)
        throw spec_error(epath + ".modes", "expected [i, j]");
      const double eta = expect_number(expect_field(el, "eta", epath), epath + ".eta");
      try {
        factor = beam_splitter_unitary(eta, expect_int(modes[0], epath + ".modes[0]"),
                                       expect_int(modes[1], epath + ".modes[1]"), dim);
      } catch (const std::invalid_argument& e) {
        throw spec_error(epath, e.what());
      }
    } else if (t == "phase") {
      const int mode = expect_int(expect_field(el, "mode", epath), epath + ".mode");
      if (mode < 0 || mode >= dim) throw spec_error(epath + ".mode", "mode index out of range");
      const double phi = expect_number(expect_field(el, "phi", epath), epath + ".phi");
      factor = CMat::Identity(dim, dim);
      factor(mode, mode) = std::exp(cplx(0.0, phi));
    } else if (t == "matrix") {
      factor = expect_complex_matrix(el, epath);
      if (factor.rows() != dim || factor.cols() != dim)
        throw spec_error(epath, "matrix dimension mismatch");
      if (!is_unitary(factor, 1e-8)) throw spec_error(epath, "matrix is not unitary");
    } else {
      throw spec_error(epath + ".type", "unknown unitary element '" + t + "'");
    }
    u = factor * u;  // elements compose in listed order
  }
  return u;
}

json unitary_to_json(const CMat& u) {
  json el = complex_matrix_to_json(u);
  el["type"] = "matrix";
  return json{{"dim", u.rows()}, {"elements", json::array({el})}};
}

ProtocolStepPtr parse_step(const json& node, const std::string& path) {
  auto step = std::make_shared<ProtocolStep>();
  if (!node.is_object()) throw spec_error(path, "expected a protocol step object");

  if (node.contains("ancillas")) {
    const json& anc = node["ancillas"];
    if (!anc.is_array()) throw spec_error(path + ".ancillas", "expected an array");
    for (std::size_t i = 0; i < anc.size(); ++i)
      step->ancillas.push_back(expect_complex(anc[i], path + ".ancillas[" + std::to_string(i) + "]"));
  }
  if (node.contains("unitary")) step->unitary = parse_unitary(node["unitary"], path + ".unitary");
  if (node.contains("measurement")) {
    const json& m = node["measurement"];
    const std::string mpath = path + ".measurement";
    Measurement meas;
    const json& modes = expect_field(m, "modes", mpath);
    if (!modes.is_array() || modes.empty())
      throw spec_error(mpath + ".modes", "expected a nonempty array");
    for (std::size_t i = 0; i < modes.size(); ++i)
      meas.modes.push_back(expect_int(modes[i], mpath + ".modes[" + std::to_string(i) + "]"));
    const json& kind = expect_field(m, "kind", mpath);
    const std::string k = kind.is_string() ? kind.get<std::string>() : "";
    if (k == "photon_count") meas.kind = MeasurementKind::photon_count;
    else if (k == "vacuum") meas.kind = MeasurementKind::vacuum_projection;
    else if (k == "coherent") {
      meas.kind = MeasurementKind::coherent_projection;
      meas.alpha = expect_complex(expect_field(m, "alpha", mpath), mpath + ".alpha");
    } else {
      throw spec_error(mpath + ".kind", "expected photon_count, vacuum or coherent");
    }
    step->measurement = std::move(meas);
  }
  if (node.contains("trace_out")) {
    const json& t = node["trace_out"];
    if (!t.is_array()) throw spec_error(path + ".trace_out", "expected an array");
    for (std::size_t i = 0; i < t.size(); ++i)
      step->trace_out.push_back(expect_int(t[i], path + ".trace_out[" + std::to_string(i) + "]"));
  }
  if (node.contains("gain")) step->gain = expect_complex_matrix(node["gain"], path + ".gain");
  if (node.contains("rules")) {
    const json& rules = node["rules"];
    if (!rules.is_array()) throw spec_error(path + ".rules", "expected an array");
    for (std::size_t i = 0; i < rules.size(); ++i) {
      const std::string rpath = path + ".rules[" + std::to_string(i) + "]";
      const json& r = rules[i];
      FeedForwardRule rule;
      if (r.contains("outcome")) {
        const json& oc = r["outcome"];
        if (!oc.is_array()) throw spec_error(rpath + ".outcome", "expected an array");
        std::vector<int> outcome;
        for (std::size_t j = 0; j < oc.size(); ++j)
          outcome.push_back(expect_int(oc[j], rpath + ".outcome[" + std::to_string(j) + "]"));
        rule.outcome = std::move(outcome);
      }
      if (r.contains("displace")) {
        const json& disp = r["displace"];
        if (!disp.is_array()) throw spec_error(rpath + ".displace", "expected an array");
        for (std::size_t j = 0; j < disp.size(); ++j)
          rule.displacement.push_back(
              expect_complex(disp[j], rpath + ".displace[" + std::to_string(j) + "]"));
      }
      if (r.contains("next")) rule.next = parse_step(r["next"], rpath + ".next");
      step->rules.push_back(std::move(rule));
    }
  }
  if (node.contains("next")) step->next = parse_step(node["next"], path + ".next");
  if (node.contains("allow_oversized_ancilla")) {
    if (!node["allow_oversized_ancilla"].is_boolean())
      throw spec_error(path + ".allow_oversized_ancilla", "expected a boolean");
    step->allow_oversized_ancilla = node["allow_oversized_ancilla"].get<bool>();
  }
  return step;
}

json step_to_json(const ProtocolStep& step) {
  json node = json::object();
  if (!step.ancillas.empty()) {
    json anc = json::array();
    for (cplx a : step.ancillas) anc.push_back(complex_to_json(a));
    node["ancillas"] = anc;
  }
  if (step.unitary.size() > 0) node["unitary"] = unitary_to_json(step.unitary);
  if (step.measurement) {
    json m{{"modes", step.measurement->modes}};
    switch (step.measurement->kind) {
      case MeasurementKind::photon_count: m["kind"] = "photon_count"; break;
      case MeasurementKind::vacuum_projection: m["kind"] = "vacuum"; break;
      case MeasurementKind::coherent_projection:
        m["kind"] = "coherent";
        m["alpha"] = complex_to_json(step.measurement->alpha);
        break;
    }
    node["measurement"] = m;
  }
  if (!step.trace_out.empty()) node["trace_out"] = step.trace_out;
  if (step.gain.size() > 0) node["gain"] = complex_matrix_to_json(step.gain);
  if (!step.rules.empty()) {
    json rules = json::array();
    for (const FeedForwardRule& r : step.rules) {
      json rule = json::object();
      if (r.outcome) rule["outcome"] = *r.outcome;
      if (!r.displacement.empty()) {
        json disp = json::array();
        for (cplx d : r.displacement) disp.push_back(complex_to_json(d));
        rule["displace"] = disp;
      }
      if (r.next) rule["next"] = step_to_json(*r.next);
      rules.push_back(rule);
    }
    node["rules"] = rules;
  }
  if (step.next) node["next"] = step_to_json(*step.next);
  if (step.allow_oversized_ancilla) node["allow_oversized_ancilla"] = true;
  return node;
}

}  // namespace

ProtocolDocument parse_protocol(const json& doc, const std::string& path) {
  ProtocolDocument p;
  if (doc.contains("name")) {
    if (!doc["name"].is_string()) throw spec_error(path + ".name", "expected a string");
    p.name = doc["name"].get<std::string>();
  }
  if (doc.contains("domain")) {
    if (!doc["domain"].is_string()) throw spec_error(path + ".domain", "expected a string");
    p.domain = doc["domain"].get<std::string>();
  }
  if (p.domain == "fock") {
    p.step = parse_step(expect_field(doc, "step", path), path + ".step");
  } else if (p.domain == "gaussian") {
    p.eta = expect_number(expect_field(doc, "eta", path), path + ".eta");
    if (p.eta < 0.0 || p.eta > 1.0) throw spec_error(path + ".eta", "eta must lie in [0,1]");
  } else {
    throw spec_error(path + ".domain", "expected 'fock' or 'gaussian'");
  }
  return p;
}

json protocol_to_json(const ProtocolDocument& doc) {
  json out{{"name", doc.name}, {"domain", doc.domain}};
  if (doc.domain == "fock") out["step"] = step_to_json(*doc.step);
  else out["eta"] = doc.eta;
  return out;
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

json to_json(const Vec& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

json to_json(const Mat& m) { return matrix_to_json(m); }

json to_json(const MonotoneReport& report) {
  return json{
      {"v", to_json(report.v)},           {"w", to_json(report.w)},
      {"f", to_json(report.f)},           {"g", to_json(report.g)},
      {"v_partial", to_json(report.v_partial)}, {"w_partial", to_json(report.w_partial)},
      {"f_partial", to_json(report.f_partial)}, {"g_partial", to_json(report.g_partial)},
  };
}

json to_json(const NMeasures& m) {
  return json{{"n1", m.n1}, {"n2", m.n2}, {"n3", m.n3}, {"v_plus", m.v_plus}, {"v_minus", m.v_minus}};
}

json to_json(const ConversionVerdict& verdict) {
  json certs = json::array();
  for (const Certificate& c : verdict.certificates)
    certs.push_back(json{{"monotone", c.monotone}, {"source", c.source_value}, {"target", c.target_value}});
  return json{{"feasible", verdict.feasible},
              {"regime", verdict.regime == Regime::p0 ? "p0" : "gpn"},
              {"certificates", certs}};
}

}  // namespace cvnc
