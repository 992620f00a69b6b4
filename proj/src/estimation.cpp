#include "obsest/estimation.hpp"

#include <algorithm>
#include <stdexcept>

namespace obsest {

namespace {

void require_copies(int copies) {
  if (copies < 1) throw std::invalid_argument("number of copies must be at least 1");
}

void require_qubit(const Observable& obs) {
  if (obs.dim() != 2) throw std::invalid_argument("mixed-qubit formulas require d = 2");
}

void require_n2(double n2) {
  if (!(n2 >= 0.0 && n2 <= 1.0)) throw std::invalid_argument("<n^2> must lie in [0, 1]");
}

}  // namespace

std::string to_string(EstimatorKind::Kind kind) {
  switch (kind) {
    case EstimatorKind::Kind::sample_average: return "sample-average";
    case EstimatorKind::Kind::optimal_pure: return "optimal-pure";
    case EstimatorKind::Kind::optimal_mixed_qubit: return "optimal-mixed-qubit";
  }
  return "?";
}

EstimatorKind::Kind parse_estimator_kind(const std::string& name) {
  if (name == "sample-average") return EstimatorKind::Kind::sample_average;
  if (name == "optimal-pure") return EstimatorKind::Kind::optimal_pure;
  if (name == "optimal-mixed-qubit") return EstimatorKind::Kind::optimal_mixed_qubit;
  throw std::invalid_argument("unknown estimator '" + name + "'");
}

OutcomeSequence outcomes_from_indices(const std::vector<int>& indices, const Observable& obs) {
  OutcomeSequence out;
  out.indices = indices;
  out.values.reserve(indices.size());
  for (int i : indices) {
    if (i < 0 || i >= obs.dim()) throw std::out_of_range("outcome index out of range");
    out.values.push_back(obs.eigenvalues()[i]);
  }
  return out;
}

int sample_outcome_index(const RVector& cdf, RngStream& stream) {
  const double u = stream.uniform() * cdf[cdf.size() - 1];
  const auto* begin = cdf.data();
  const auto* end = begin + cdf.size();
  const auto* it = std::upper_bound(begin, end, u);
  int idx = static_cast<int>(it - begin);
  if (it == end) {
    // u rounded up to the total mass: take the last bin with positive weight.
    idx = static_cast<int>(cdf.size()) - 1;
    while (idx > 0 && cdf[idx] == cdf[idx - 1]) --idx;
  }
  return idx;
}

OutcomeSequence simulate_measurements(const PureState& state, const Observable& obs, int copies,
                                      RngStream& stream) {
  if (copies < 1) throw std::invalid_argument("simulate_measurements needs N >= 1");
  const RVector p = outcome_distribution(state, obs);
  RVector cdf(p.size());
  double acc = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) cdf[i] = (acc += p[i]);

  OutcomeSequence out;
  out.indices.reserve(copies);
  out.values.reserve(copies);
  for (int n = 0; n < copies; ++n) {
    const int idx = sample_outcome_index(cdf, stream);
    out.indices.push_back(idx);
    out.values.push_back(obs.eigenvalues()[idx]);
  }
  return out;
}

double estimate_sample_average(const OutcomeSequence& outcomes) {
  if (outcomes.empty()) throw std::invalid_argument("sample average of an empty outcome sequence");
  double sum = 0.0;
  for (double v : outcomes.values) sum += v;
  return sum / static_cast<double>(outcomes.size());
}

double estimate_optimal(const OutcomeSequence& outcomes, const Observable& obs) {
  if (outcomes.empty()) throw std::invalid_argument("optimal estimate of an empty outcome sequence");
  double sum = obs.trace();
  for (double v : outcomes.values) sum += v;
  return sum / static_cast<double>(outcomes.size() + obs.dim());
}

double estimate_optimal_mixed_qubit(const OutcomeSequence& outcome, const Observable& obs, double n2) {
  require_qubit(obs);
  require_n2(n2);
  if (outcome.size() != 1) throw std::invalid_argument("mixed-qubit estimate requires exactly one outcome");
  const double centre = obs.trace() / 2.0;
  return centre + n2 * (outcome.values.front() - centre) / 3.0;
}

double estimate(const EstimatorKind& kind, const OutcomeSequence& outcomes, const Observable& obs) {
  switch (kind.kind) {
    case EstimatorKind::Kind::sample_average: return estimate_sample_average(outcomes);
    case EstimatorKind::Kind::optimal_pure: return estimate_optimal(outcomes, obs);
    case EstimatorKind::Kind::optimal_mixed_qubit: return estimate_optimal_mixed_qubit(outcomes, obs, kind.n2);
  }
  return 0.0;
}

double analytic_delta_opt(const Observable& obs, int copies) {
  require_copies(copies);
  const double d = obs.dim();
  return obs.spread() / (d * (d + 1.0) * (copies + d));
}

double analytic_delta_av(const Observable& obs, int copies) {
  require_copies(copies);
  const double d = obs.dim();
  return obs.spread() / (d * (d + 1.0) * copies);
}

double analytic_delta_av_conditional(const PureState& state, const Observable& obs, int copies) {
  require_copies(copies);
  const RVector p = outcome_distribution(state, obs);
  const double mean = p.dot(obs.eigenvalues());
  const double mean_sq = p.dot(obs.eigenvalues().cwiseAbs2());
  return std::max(0.0, mean_sq - mean * mean) / copies;
}

double analytic_bias_mean(const PureState& state, const Observable& obs, int copies) {
  require_copies(copies);
  return (obs.trace() + copies * expectation(state, obs)) / (copies + obs.dim());
}

double analytic_second_moment(const Observable& obs) {
  const double d = obs.dim();
  return (obs.trace() * obs.trace() + obs.trace_of_square()) / (d * (d + 1.0));
}

double analytic_delta_mixed_qubit(const Observable& obs, double n2) {
  require_qubit(obs);
  require_n2(n2);
  const double spread = 2.0 * obs.trace_of_square() - obs.trace() * obs.trace();
  return n2 / 12.0 * (1.0 - n2 / 3.0) * spread;
}

double analytic_mixed_qubit_mean(const MixedQubitState& state, const Observable& obs, double n2) {
  require_n2(n2);
  const double centre = obs.trace() / 2.0;
  return centre + n2 * (mixed_qubit_expectation(state, obs) - centre) / 3.0;
}

}  // namespace obsest
