#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "obsest/ensemble.hpp"
#include "obsest/estimation.hpp"
#include "obsest/hermitian.hpp"

namespace obsest {

/// Bad configuration, unreadable input or an unparsable observable file.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Ensemble {
  enum class Kind { haar_pure, bloch };

  Kind kind = Kind::haar_pure;
  RadialLaw law = RadialLaw::pure_surface();  // bloch only

  static Ensemble haar_pure() { return {}; }
  static Ensemble bloch(const RadialLaw& law) { return {Kind::bloch, law}; }

  /// ⟨n²⟩ of the ensemble; 1 for pure states.
  double second_moment() const { return kind == Kind::haar_pure ? 1.0 : law.second_moment(); }
  std::string label() const;
};

struct ExperimentConfig {
  int dim = 0;  ///< 0: take d from the observable
  int copies = 1;
  std::int64_t trials = 100000;
  std::uint64_t master_seed = 0;
  EstimatorKind estimator = EstimatorKind::optimal_pure();
  Ensemble ensemble;
  std::string observable_source = "pauli-z";
  int workers = 1;

  /// Throws ConfigError on violated invariants. Expects `dim` resolved.
  void validate() const;
};

/// One experiment's outcome. Missing analytic values are NaN.
struct ResultRow {
  ExperimentConfig config;
  double n2 = 0.0;  ///< NaN when the estimator/ensemble has no ⟨n²⟩
  double empirical_mse = 0.0;
  double standard_error = 0.0;
  double analytic_mse = 0.0;
  double empirical_bias_at_probe = 0.0;
  double analytic_bias_at_probe = 0.0;
  double bias_standard_error = 0.0;  ///< standard error of the probe mean
  double wall_time = 0.0;            ///< seconds
};

/// Builtins: "pauli-x", "pauli-y", "pauli-z", "identity", "random-hermitian",
/// "diag(v1,v2,...)". Anything else is read as a JSON observable file
/// { "dim": d, "matrix": [[[re,im],...],...] }. `dim` sizes the
/// dimension-free builtins; `seed` drives "random-hermitian".
Observable load_observable(const std::string& source, int dim = 2, std::uint64_t seed = 0);

/// Parses the observable JSON document; errors name line and column.
Observable parse_observable_json(const std::string& text);
nlohmann::json observable_to_json(const Observable& obs);

/// Resolves `dim` against the observable source and loads the observable
/// used by `config` (shared by every estimator run on the same (d, N) cell).
Observable resolve_observable(ExperimentConfig& config);

ExperimentConfig config_from_json(const nlohmann::json& j);
ExperimentConfig load_config(const std::string& path);
nlohmann::json config_to_json(const ExperimentConfig& config);

ResultRow run_experiment(ExperimentConfig config);

/// Both estimators on every (d, N) cell; rows ordered by d, then N, then
/// sample-average before optimal-pure.
std::vector<ResultRow> run_sweep(const ExperimentConfig& base, const std::vector<int>& copies_values,
                                 const std::vector<int>& dim_values);

/// Closed forms for a configuration, including ω_opt for every repeated outcome.
nlohmann::json analytic_report(ExperimentConfig config);

extern const std::vector<std::string> kCsvColumns;

void write_csv_header(std::ostream& out);
/// wall_time_s is left empty unless `include_timing`, so that reruns are
/// byte-identical.
void write_csv_row(std::ostream& out, const ResultRow& row, bool include_timing = false);
std::string format_number(double value);

/// Compensated running sum.
class KahanSum {
 public:
  void add(double x) {
    const double y = x - carry_;
    const double t = sum_ + y;
    carry_ = (t - sum_) - y;
    sum_ = t;
  }
  double value() const { return sum_; }

 private:
  double sum_ = 0.0;
  double carry_ = 0.0;
};

}  // namespace obsest
