#pragma once

#include <string>
#include <vector>

#include "obsest/ensemble.hpp"
#include "obsest/hermitian.hpp"

namespace obsest {

/// Eigen-indices and the corresponding eigenvalues observed on N copies.
struct OutcomeSequence {
  std::vector<int> indices;
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
  bool empty() const { return values.empty(); }
};

/// Builds a sequence from eigen-indices of `obs`.
OutcomeSequence outcomes_from_indices(const std::vector<int>& indices, const Observable& obs);

struct EstimatorKind {
  enum class Kind { sample_average, optimal_pure, optimal_mixed_qubit };

  Kind kind = Kind::optimal_pure;
  double n2 = 1.0;  // ⟨n²⟩, used by optimal_mixed_qubit only

  static EstimatorKind sample_average() { return {Kind::sample_average, 1.0}; }
  static EstimatorKind optimal_pure() { return {Kind::optimal_pure, 1.0}; }
  static EstimatorKind optimal_mixed_qubit(double n2) { return {Kind::optimal_mixed_qubit, n2}; }
};

std::string to_string(EstimatorKind::Kind kind);
/// Parses "sample-average", "optimal-pure" or "optimal-mixed-qubit".
EstimatorKind::Kind parse_estimator_kind(const std::string& name);

/// Draws one eigen-index from the cumulative outcome distribution `cdf`.
int sample_outcome_index(const RVector& cdf, RngStream& stream);

/// N independent projective measurements of `obs` on copies of `state`.
OutcomeSequence simulate_measurements(const PureState& state, const Observable& obs, int copies,
                                      RngStream& stream);

/// Mean of the observed eigenvalues.
double estimate_sample_average(const OutcomeSequence& outcomes);

/// (trΩ + Σ observed) / (N + d): the observed data averaged together with all
/// d eigenvalues of Ω.
double estimate_optimal(const OutcomeSequence& outcomes, const Observable& obs);

/// Single-qubit, single-copy optimum for an isotropic Bloch-ball ensemble
/// with second moment `n2`: trΩ/2 + n2 (Ω_i − trΩ/2) / 3.
double estimate_optimal_mixed_qubit(const OutcomeSequence& outcome, const Observable& obs, double n2);

/// Dispatches on `kind`.
double estimate(const EstimatorKind& kind, const OutcomeSequence& outcomes, const Observable& obs);

// Closed-form errors and moments. All formulas depend on Ω only through d,
// trΩ and trΩ².

/// Minimal Haar-averaged squared error, spread / (d(d+1)(N+d)).
double analytic_delta_opt(const Observable& obs, int copies);
/// Haar-averaged squared error of the sample average, spread / (d(d+1)N).
double analytic_delta_av(const Observable& obs, int copies);
/// Variance of the sample mean at a fixed state, (tr[ρΩ²] − tr[ρΩ]²) / N.
double analytic_delta_av_conditional(const PureState& state, const Observable& obs, int copies);
/// Conditional mean of the optimal estimator at a fixed state,
/// (trΩ + N tr[ρΩ]) / (N + d).
double analytic_bias_mean(const PureState& state, const Observable& obs, int copies);
/// Haar average of tr[ρΩ]², ((trΩ)² + trΩ²) / (d(d+1)).
double analytic_second_moment(const Observable& obs);
/// Minimal squared error of the single-copy qubit estimate under an isotropic
/// Bloch-ball ensemble with ⟨n²⟩ = n2:
/// (n2/12)(1 − n2/3)(2trΩ² − (trΩ)²).
double analytic_delta_mixed_qubit(const Observable& obs, double n2);
/// Conditional mean of `estimate_optimal_mixed_qubit` at a fixed qubit state.
double analytic_mixed_qubit_mean(const MixedQubitState& state, const Observable& obs, double n2);

}  // namespace obsest
