#pragma once

#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "cvnc/fock.hpp"
#include "cvnc/gaussian.hpp"
#include "cvnc/monotones.hpp"
#include "cvnc/protocols.hpp"

namespace cvnc {

/// Input-document violation; `path` points at the offending field.
class spec_error : public std::runtime_error {
 public:
  spec_error(std::string path, const std::string& message)
      : std::runtime_error(path + ": " + message), path(std::move(path)) {}
  std::string path;
};

using json = nlohmann::json;

struct StateSpec {
  std::string kind;  // coherent | fock_superposition | cat | squeezed_gaussian |
                     // thermal | thermal_minus_vacuum | gaussian_raw | tensor_product
  std::vector<cplx> alphas;                      // coherent
  cplx alpha{};                                  // cat
  int sign = 1;                                  // cat
  std::vector<std::pair<int, cplx>> terms;       // fock_superposition
  double s = 1.0;                                // squeezed_gaussian
  double theta = 0.0;                            // squeezed_gaussian rotation
  double d = 0.5;                                // thermal
  double p = 0.5;                                // thermal_minus_vacuum
  Mat cov;                                       // gaussian_raw
  Vec mean;                                      // optional first moments
  int cutoff = 0;                                // fock kinds; 0 = pick automatically
  std::vector<StateSpec> factors;                // tensor_product
};

StateSpec parse_state_spec(const json& doc, const std::string& path = "$");
json state_spec_to_json(const StateSpec& spec);

/// True when the spec builds through the covariance-matrix path.
bool is_gaussian_kind(const StateSpec& spec);

struct BuiltState {
  bool gaussian_path;
  std::optional<GaussianState> gaussian;
  std::optional<FockState> fock;
};

BuiltState build_state(const StateSpec& spec, double trunc_budget = kDefaultTruncationBudget);

/// Covariance matrix of the built state regardless of path.
Mat state_covariance(const BuiltState& state);

struct RunConfig {
  double tolerance = 1e-10;
  double trunc_budget = kDefaultTruncationBudget;
  unsigned long long seed = 0;
  std::string format = "json";  // json | csv
  std::string out_path;         // empty = stdout
};

// ---- protocol documents ----

struct ProtocolDocument {
  std::string name;
  std::string domain = "fock";  // fock | gaussian
  ProtocolStepPtr step;         // fock domain
  double eta = 0.5;             // gaussian domain (homodyne feed-forward)
};

ProtocolDocument parse_protocol(const json& doc, const std::string& path = "$");
json protocol_to_json(const ProtocolDocument& doc);

// ---- report serialization ----

json to_json(const Vec& v);
json to_json(const Mat& m);
json to_json(const MonotoneReport& report);
json to_json(const NMeasures& m);
json to_json(const ConversionVerdict& verdict);

}  // namespace cvnc
