#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cvnc/fock.hpp"
#include "cvnc/monotones.hpp"

namespace cvnc {

enum class MeasurementKind { photon_count, vacuum_projection, coherent_projection };

struct Measurement {
  std::vector<int> modes;  // measured destructively, in post-unitary numbering
  MeasurementKind kind = MeasurementKind::photon_count;
  cplx alpha{};  // coherent projection target
};

struct ProtocolStep;
using ProtocolStepPtr = std::shared_ptr<ProtocolStep>;

// Outcome-conditioned continuation: either a displacement on the surviving
// modes, a follow-up step, or both.
struct FeedForwardRule {
  std::optional<std::vector<int>> outcome;  // nullopt matches any outcome
  std::vector<cplx> displacement;
  ProtocolStepPtr next;
};

/// One round of a free-operation instrument: attach classical (coherent)
/// ancillas, apply a passive linear unitary over system+ancilla, optionally
/// measure a mode subset destructively and/or trace out modes, then branch.
struct ProtocolStep {
  std::vector<cplx> ancillas;
  CMat unitary;  // empty = identity; otherwise dim = current modes + ancillas
  std::optional<Measurement> measurement;
  std::vector<int> trace_out;  // discarded unrecorded, post-unitary numbering
  // Linear-gain feed-forward: displacement gain(mode, k) * outcome_k applied
  // to the surviving modes.
  CMat gain;  // empty = none; (surviving modes) x (measurement outcome length)
  std::vector<FeedForwardRule> rules;
  ProtocolStepPtr next;  // unconditional continuation
  bool allow_oversized_ancilla = false;  // override of the ancilla-size bound
};

struct BranchOutcome {
  std::vector<int> record;  // concatenated outcomes of all rounds
  double probability;
  std::optional<FockState> post;  // absent for the overflow record
  bool overflow = false;          // truncation residual, not a real outcome
};

/// Runs the instrument with exhaustive branch enumeration. Photon counting
/// is enumerated up to the cutoff; vacuum/coherent projections branch into
/// click (outcome 1) and no-click (outcome 0). Branches are sorted by
/// outcome record, with a final overflow entry carrying the truncation
/// residual. Probabilities sum to 1 within 1e-9 including that entry.
std::vector<BranchOutcome> run_instrument(const FockState& state, const ProtocolStep& step);

/// Merges branches whose records agree on the kept coordinates, mixing the
/// post states; the coarse-grained record keeps only those coordinates.
std::vector<BranchOutcome> coarse_grain(const std::vector<BranchOutcome>& branches,
                                        const std::vector<int>& kept_record_indices);

struct CatGrowthReport {
  double p_success;
  FockPure output;
  double w1_before;  // W_1 of the input cat pair
  double w1_after;
  double slack;  // W_1(in) - p * W_1(out)
  bool bound_respected;
};

/// 50/50 beam splitter on a cat pair followed by vacuum projection of one
/// mode: the concentration scheme that doubles |alpha|^2.
CatGrowthReport cat_growth_protocol(cplx alpha, int cutoff);

struct KrausFit {
  std::vector<int> record;
  CMat m;                     // fitted contraction matrix
  CVec delta;                 // fitted displacement
  double max_singular_value;
  double residual;            // worst-case |alpha_out - (M alpha_in + delta)|
  bool applicable;            // false if some branch output was not coherent
  double worst_cov_deviation; // max |V - I/2| seen across samples
};

/// Least-squares fit of alpha_out = M alpha_in + delta from (input, output)
/// coherent-amplitude samples.
KrausFit fit_coherent_map(const std::vector<std::pair<CVec, CVec>>& samples);

/// Feeds a deterministic grid of coherent inputs through the instrument and
/// fits the contraction/displacement of every fine-grained branch. Branch
/// outputs whose covariance deviates from I/2 by more than cov_tol are
/// flagged fit-inapplicable.
std::vector<KrausFit> verify_kraus_contraction(const ProtocolStep& step, int n_input_modes,
                                               int cutoff, int sample_count,
                                               double alpha_magnitude, double cov_tol = 1e-6,
                                               unsigned seed = 12345);

enum class MonotoneFamily { v, w, f, g };

struct MonotonicityReport {
  struct Branch {
    std::vector<int> record;
    double probability;
    double worst_margin;  // min over k of M_k(in) - p * M_k(out)
    bool skipped_mixed;   // V/W families check pure branches only
    bool ok;
  };
  std::vector<Branch> branches;
  double ensemble_margin;   // M_full(in) - sum_m p_m M_full(out_m)
  bool ensemble_evaluated;  // false when mixed branches were skipped
  bool ensemble_ok;
  bool eigenwise_evaluated;  // deterministic (P0) elementwise f_i/g_i check
  double eigenwise_margin;
  bool all_ok;
};

/// Checks the per-branch and ensemble monotone inequalities for the chosen
/// family. V/W require a pure input and evaluate pure branches; F/G work on
/// arbitrary states via the QFI matrix. For measurement-free protocols the
/// elementwise eigenvalue check also runs.
MonotonicityReport check_monotonicity(const FockState& state, const ProtocolStep& step,
                                      MonotoneFamily family, double tol = 1e-8);

}  // namespace cvnc
