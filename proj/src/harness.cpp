#include "obsest/harness.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>
#include <thread>

#include "obsest/symmetric.hpp"

namespace obsest {

using nlohmann::json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr std::uint64_t kProbeDomain = 0x70726f6265ULL;       // "probe"
constexpr std::uint64_t kObservableDomain = 0x6f62736572ULL;  // "obser"

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\n\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\n\r");
  return s.substr(b, e - b + 1);
}

std::pair<std::size_t, std::size_t> line_column(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < std::min(byte, text.size()); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  // nlohmann reports the byte just past the offending character.
  return {line, col > 1 ? col - 1 : col};
}

bool is_dimension_free(const std::string& source) {
  return source == "identity" || source == "random-hermitian";
}

Observable parse_diag(const std::string& source) {
  const std::string body = source.substr(5, source.size() - 6);
  std::vector<double> values;
  std::stringstream ss(body);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    double v = 0.0;
    const auto res = std::from_chars(item.data(), item.data() + item.size(), v);
    if (item.empty() || res.ec != std::errc() || res.ptr != item.data() + item.size())
      throw ConfigError("cannot parse diagonal entry '" + item + "' in " + source);
    values.push_back(v);
  }
  if (values.size() < 2) throw ConfigError("diag(...) needs at least two entries");
  CMatrix m = CMatrix::Zero(values.size(), values.size());
  for (std::size_t i = 0; i < values.size(); ++i) m(i, i) = values[i];
  return Observable(m);
}

RVector cumulative(const RVector& p) {
  RVector cdf(p.size());
  double acc = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) cdf[i] = (acc += std::max(0.0, p[i]));
  return cdf;
}

RVector mixed_outcome_distribution(const MixedQubitState& state, const Observable& obs) {
  const CMatrix rho = state.density();
  RVector p(2);
  for (int i = 0; i < 2; ++i) p[i] = (obs.eigenvectors().col(i).adjoint() * rho * obs.eigenvectors().col(i))(0, 0).real();
  return p;
}

double draw_estimate(const EstimatorKind& kind, const Observable& obs, const RVector& cdf, int copies,
                     RngStream& stream) {
  OutcomeSequence outcomes;
  outcomes.indices.reserve(copies);
  outcomes.values.reserve(copies);
  for (int n = 0; n < copies; ++n) {
    const int idx = sample_outcome_index(cdf, stream);
    outcomes.indices.push_back(idx);
    outcomes.values.push_back(obs.eigenvalues()[idx]);
  }
  return estimate(kind, outcomes, obs);
}

struct Moments {
  double mean = 0.0;
  double standard_error = 0.0;
};

// Fixed-order compensated reduction.
Moments reduce(const std::vector<double>& xs) {
  KahanSum sum;
  for (double x : xs) sum.add(x);
  Moments m;
  const double n = static_cast<double>(xs.size());
  m.mean = sum.value() / n;
  if (xs.size() > 1) {
    KahanSum sq;
    for (double x : xs) sq.add((x - m.mean) * (x - m.mean));
    m.standard_error = std::sqrt(sq.value() / (n - 1.0)) / std::sqrt(n);
  }
  return m;
}

template <typename Fn>
void parallel_for(std::int64_t count, int workers, Fn&& fn) {
  workers = static_cast<int>(std::max<std::int64_t>(1, std::min<std::int64_t>(workers, count)));
  if (workers == 1) {
    for (std::int64_t k = 0; k < count; ++k) fn(k);
    return;
  }
  const std::int64_t chunk = (count + workers - 1) / workers;
  std::vector<std::jthread> pool;
  for (int w = 0; w < workers; ++w) {
    const std::int64_t begin = w * chunk, end = std::min(count, begin + chunk);
    pool.emplace_back([begin, end, &fn] {
      for (std::int64_t k = begin; k < end; ++k) fn(k);
    });
  }
}

std::uint64_t observable_seed(const ExperimentConfig& config) {
  return mix64(config.master_seed ^ kObservableDomain) ^
         mix64((static_cast<std::uint64_t>(config.dim) << 32) | static_cast<std::uint64_t>(config.copies));
}

EstimatorKind effective_estimator(const ExperimentConfig& config) {
  EstimatorKind kind = config.estimator;
  if (kind.kind == EstimatorKind::Kind::optimal_mixed_qubit) kind.n2 = config.ensemble.second_moment();
  return kind;
}

double analytic_mse_for(const ExperimentConfig& config, const Observable& obs) {
  const bool pure = config.ensemble.kind == Ensemble::Kind::haar_pure;
  switch (config.estimator.kind) {
    case EstimatorKind::Kind::optimal_pure: return pure ? analytic_delta_opt(obs, config.copies) : kNaN;
    case EstimatorKind::Kind::sample_average: return pure ? analytic_delta_av(obs, config.copies) : kNaN;
    case EstimatorKind::Kind::optimal_mixed_qubit:
      return analytic_delta_mixed_qubit(obs, config.ensemble.second_moment());
  }
  return kNaN;
}

RadialLaw law_from_json(const json& j) {
  const std::string kind = j.value("law", std::string("pure-surface"));
  if (kind == "pure-surface") return RadialLaw::pure_surface();
  if (kind == "uniform-ball") return RadialLaw::uniform_ball();
  if (kind == "fixed-radius") return RadialLaw::fixed_radius(j.at("radius").get<double>());
  if (kind == "two-point") return RadialLaw::two_point(j.at("radius").get<double>(), j.at("weight").get<double>());
  throw ConfigError("unknown radial law '" + kind + "'");
}

}  // namespace

std::string Ensemble::label() const {
  if (kind == Kind::haar_pure) return "haar-pure";
  std::string s = std::string("bloch:") + to_string(law.kind);
  if (law.kind == RadialLaw::Kind::fixed_radius || law.kind == RadialLaw::Kind::two_point)
    s += ":r=" + format_number(law.radius);
  if (law.kind == RadialLaw::Kind::two_point) s += ":w=" + format_number(law.weight);
  return s;
}

void ExperimentConfig::validate() const {
  if (dim < 2) throw ConfigError("dim must be at least 2");
  if (copies < 1) throw ConfigError("copies must be at least 1");
  if (trials < 1) throw ConfigError("trials must be at least 1");
  if (workers < 1) throw ConfigError("workers must be at least 1");
  if (ensemble.kind == Ensemble::Kind::bloch) {
    if (dim != 2) throw ConfigError("bloch ensemble requires dim = 2");
    try {
      ensemble.law.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }
  if (estimator.kind == EstimatorKind::Kind::optimal_mixed_qubit && (dim != 2 || copies != 1))
    throw ConfigError("optimal-mixed-qubit estimator requires dim = 2 and copies = 1");
}

Observable parse_observable_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    const auto [line, col] = line_column(text, e.byte);
    throw ConfigError("observable JSON parse error at line " + std::to_string(line) + ", column " +
                      std::to_string(col) + ": " + e.what());
  }
  try {
    const int d = j.at("dim").get<int>();
    const json& rows = j.at("matrix");
    if (d < 2) throw ConfigError("observable dim must be at least 2");
    if (!rows.is_array() || static_cast<int>(rows.size()) != d)
      throw ConfigError("observable matrix must have " + std::to_string(d) + " rows");
    CMatrix m(d, d);
    for (int r = 0; r < d; ++r) {
      if (!rows[r].is_array() || static_cast<int>(rows[r].size()) != d)
        throw ConfigError("observable matrix row " + std::to_string(r) + " must have " + std::to_string(d) + " entries");
      for (int c = 0; c < d; ++c) {
        const json& entry = rows[r][c];
        if (!entry.is_array() || entry.size() != 2)
          throw ConfigError("observable entry (" + std::to_string(r) + "," + std::to_string(c) + ") must be [re, im]");
        m(r, c) = Complex(entry[0].get<double>(), entry[1].get<double>());
      }
    }
    return Observable(m);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed observable document: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("invalid observable: ") + e.what());
  }
}

json observable_to_json(const Observable& obs) {
  json rows = json::array();
  for (int r = 0; r < obs.dim(); ++r) {
    json row = json::array();
    for (int c = 0; c < obs.dim(); ++c) row.push_back({obs.matrix()(r, c).real(), obs.matrix()(r, c).imag()});
    rows.push_back(row);
  }
  return {{"dim", obs.dim()}, {"matrix", rows}};
}

Observable load_observable(const std::string& source, int dim, std::uint64_t seed) {
  const std::string s = trim(source);
  if (s == "pauli-x") return Observable(pauli(0));
  if (s == "pauli-y") return Observable(pauli(1));
  if (s == "pauli-z") return Observable(pauli(2));
  if (s == "identity" || s == "random-hermitian") {
    if (dim < 2) throw ConfigError(s + " observable needs dim >= 2");
    if (s == "identity") return Observable(CMatrix::Identity(dim, dim));
    RngStream stream(seed, static_cast<std::uint64_t>(dim));
    return Observable(random_hermitian(dim, stream));
  }
  if (s.rfind("diag(", 0) == 0 && s.back() == ')') return parse_diag(s);

  std::ifstream in(s);
  if (!in) throw ConfigError("unknown observable '" + s + "' (not a builtin and no such file)");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_observable_json(buf.str());
}

Observable resolve_observable(ExperimentConfig& config) {
  if (is_dimension_free(trim(config.observable_source))) {
    if (config.dim == 0) config.dim = 2;
    return load_observable(config.observable_source, config.dim, observable_seed(config));
  }
  Observable obs = load_observable(config.observable_source);
  if (config.dim == 0) config.dim = obs.dim();
  if (config.dim != obs.dim())
    throw ConfigError("observable '" + config.observable_source + "' has d = " + std::to_string(obs.dim()) +
                      " but the configuration asks for d = " + std::to_string(config.dim));
  return obs;
}

ExperimentConfig config_from_json(const json& j) {
  static const std::vector<std::string> known = {"dim",      "copies",   "trials", "master_seed", "estimator",
                                                 "ensemble", "observable_source", "workers", "n2", "sweep"};
  if (!j.is_object()) throw ConfigError("configuration must be a JSON object");
  for (const auto& [key, value] : j.items())
    if (std::find(known.begin(), known.end(), key) == known.end())
      throw ConfigError("unknown configuration field '" + key + "'");

  ExperimentConfig c;
  try {
    c.dim = j.value("dim", 0);
    c.copies = j.value("copies", 1);
    c.trials = j.value("trials", std::int64_t{100000});
    c.master_seed = j.value("master_seed", std::uint64_t{0});
    c.workers = j.value("workers", 1);
    c.observable_source = j.value("observable_source", std::string("pauli-z"));
    if (j.contains("estimator")) c.estimator.kind = parse_estimator_kind(j.at("estimator").get<std::string>());
    if (j.contains("ensemble")) {
      const json& e = j.at("ensemble");
      if (e.is_string()) {
        if (e.get<std::string>() != "haar-pure") throw ConfigError("ensemble string must be 'haar-pure'");
        c.ensemble = Ensemble::haar_pure();
      } else {
        if (e.value("kind", std::string()) != "bloch") throw ConfigError("ensemble object must have kind 'bloch'");
        c.ensemble = Ensemble::bloch(law_from_json(e));
      }
    } else if (j.contains("n2")) {
      const double n2 = j.at("n2").get<double>();
      if (!(n2 >= 0.0 && n2 <= 1.0)) throw ConfigError("n2 must lie in [0, 1]");
      c.ensemble = Ensemble::bloch(RadialLaw::fixed_radius(std::sqrt(n2)));
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed configuration: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open configuration file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  try {
    return config_from_json(json::parse(text));
  } catch (const json::parse_error& e) {
    const auto [line, col] = line_column(text, e.byte);
    throw ConfigError("configuration parse error at line " + std::to_string(line) + ", column " +
                      std::to_string(col) + ": " + e.what());
  }
}

json config_to_json(const ExperimentConfig& c) {
  json j = {{"dim", c.dim},
            {"copies", c.copies},
            {"trials", c.trials},
            {"master_seed", c.master_seed},
            {"estimator", to_string(c.estimator.kind)},
            {"observable_source", c.observable_source},
            {"workers", c.workers}};
  if (c.ensemble.kind == Ensemble::Kind::haar_pure) {
    j["ensemble"] = "haar-pure";
  } else {
    json e = {{"kind", "bloch"}, {"law", to_string(c.ensemble.law.kind)}};
    if (c.ensemble.law.kind == RadialLaw::Kind::fixed_radius || c.ensemble.law.kind == RadialLaw::Kind::two_point)
      e["radius"] = c.ensemble.law.radius;
    if (c.ensemble.law.kind == RadialLaw::Kind::two_point) e["weight"] = c.ensemble.law.weight;
    j["ensemble"] = e;
  }
  return j;
}

ResultRow run_experiment(ExperimentConfig config) {
  const auto start = std::chrono::steady_clock::now();
  const Observable obs = resolve_observable(config);
  config.validate();
  const EstimatorKind kind = effective_estimator(config);
  const bool pure = config.ensemble.kind == Ensemble::Kind::haar_pure;

  // Centred spectrum: multiples of the identity get an exact true value.
  const double centre = obs.trace() / obs.dim();
  const RVector centred = obs.eigenvalues().array() - centre;

  // Ensemble trials: one derived stream per trial, results stored by index.
  std::vector<double> sq_errors(static_cast<std::size_t>(config.trials));
  parallel_for(config.trials, config.workers, [&](std::int64_t k) {
    RngStream stream = derive_stream(config.master_seed, static_cast<std::uint64_t>(k));
    RVector p;
    double truth = 0.0;
    if (pure) {
      const PureState state = sample_haar_pure(config.dim, stream);
      p = outcome_distribution(state, obs);
      truth = centre + p.dot(centred) / p.sum();
    } else {
      const MixedQubitState state = sample_bloch_mixed(config.ensemble.law, stream);
      p = mixed_outcome_distribution(state, obs);
      truth = mixed_qubit_expectation(state, obs);
    }
    const double err = draw_estimate(kind, obs, cumulative(p), config.copies, stream) - truth;
    sq_errors[static_cast<std::size_t>(k)] = err * err;
  });

  // Bias probe at the top eigenvector of Ω.
  const PureState probe(CVector(obs.eigenvectors().col(0)));
  const double probe_truth = expectation(probe, obs);
  double analytic_mean = probe_truth;
  if (kind.kind == EstimatorKind::Kind::optimal_pure) analytic_mean = analytic_bias_mean(probe, obs, config.copies);
  if (kind.kind == EstimatorKind::Kind::optimal_mixed_qubit)
    analytic_mean = analytic_mixed_qubit_mean(MixedQubitState(probe.bloch()), obs, kind.n2);

  const RVector probe_cdf = cumulative(outcome_distribution(probe, obs));
  const std::uint64_t probe_seed = mix64(config.master_seed ^ kProbeDomain);
  std::vector<double> probe_estimates(static_cast<std::size_t>(config.trials));
  parallel_for(config.trials, config.workers, [&](std::int64_t k) {
    RngStream stream = derive_stream(probe_seed, static_cast<std::uint64_t>(k));
    probe_estimates[static_cast<std::size_t>(k)] = draw_estimate(kind, obs, probe_cdf, config.copies, stream);
  });

  const Moments mse = reduce(sq_errors);
  const Moments probe_mean = reduce(probe_estimates);

  ResultRow row;
  row.config = config;
  row.n2 = (!pure || kind.kind == EstimatorKind::Kind::optimal_mixed_qubit) ? config.ensemble.second_moment() : kNaN;
  row.empirical_mse = mse.mean;
  row.standard_error = mse.standard_error;
  row.analytic_mse = analytic_mse_for(config, obs);
  row.empirical_bias_at_probe = probe_mean.mean - probe_truth;
  row.analytic_bias_at_probe = analytic_mean - probe_truth;
  row.bias_standard_error = probe_mean.standard_error;
  row.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return row;
}

std::vector<ResultRow> run_sweep(const ExperimentConfig& base, const std::vector<int>& copies_values,
                                 const std::vector<int>& dim_values) {
  if (copies_values.empty() || dim_values.empty()) throw ConfigError("sweep needs at least one N and one d value");
  std::vector<ResultRow> rows;
  for (int d : dim_values) {
    for (int n : copies_values) {
      for (auto kind : {EstimatorKind::Kind::sample_average, EstimatorKind::Kind::optimal_pure}) {
        ExperimentConfig cell = base;
        cell.dim = d;
        cell.copies = n;
        cell.estimator = {kind, 1.0};
        rows.push_back(run_experiment(cell));
      }
    }
  }
  return rows;
}

json analytic_report(ExperimentConfig config) {
  const Observable obs = resolve_observable(config);
  config.validate();
  const int d = config.dim, n = config.copies;

  json report;
  report["config"] = config_to_json(config);
  report["observable"] = {{"eigenvalues", std::vector<double>(obs.eigenvalues().data(), obs.eigenvalues().data() + d)},
                          {"trace", obs.trace()},
                          {"trace_of_square", obs.trace_of_square()}};
  report["delta_opt"] = analytic_delta_opt(obs, n);
  report["delta_av"] = analytic_delta_av(obs, n);
  report["ratio_av_over_opt"] = static_cast<double>(n + d) / n;
  report["haar_second_moment"] = analytic_second_moment(obs);

  json estimates = json::array();
  for (int i = 0; i < d; ++i) {
    const OutcomeSequence seq = outcomes_from_indices(std::vector<int>(n, i), obs);
    estimates.push_back({{"outcome", obs.eigenvalues()[i]},
                         {"repeats", n},
                         {"omega_opt", estimate_optimal(seq, obs)},
                         {"omega_av", estimate_sample_average(seq)}});
  }
  report["estimates"] = estimates;

  if (d == 2 && n == 1) {
    const double n2 = config.ensemble.second_moment();
    json mixed = {{"n2", n2}, {"delta_mixed_qubit", analytic_delta_mixed_qubit(obs, n2)}};
    json mixed_estimates = json::array();
    for (int i = 0; i < 2; ++i)
      mixed_estimates.push_back({{"outcome", obs.eigenvalues()[i]},
                                 {"omega_opt", estimate_optimal_mixed_qubit(outcomes_from_indices({i}, obs), obs, n2)}});
    mixed["estimates"] = mixed_estimates;
    report["mixed_qubit"] = mixed;
  }
  return report;
}

const std::vector<std::string> kCsvColumns = {"d",           "N",           "M",           "seed",          "estimator",
                                              "ensemble",    "n2",          "empirical_mse", "standard_error",
                                              "analytic_mse", "empirical_bias", "analytic_bias", "wall_time_s"};

std::string format_number(double value) {
  if (std::isnan(value)) return "";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

void write_csv_header(std::ostream& out) {
  for (std::size_t i = 0; i < kCsvColumns.size(); ++i) out << (i ? "," : "") << kCsvColumns[i];
  out << '\n';
}

void write_csv_row(std::ostream& out, const ResultRow& row, bool include_timing) {
  const ExperimentConfig& c = row.config;
  out << c.dim << ',' << c.copies << ',' << c.trials << ',' << c.master_seed << ',' << to_string(c.estimator.kind)
      << ',' << c.ensemble.label() << ',' << format_number(row.n2) << ',' << format_number(row.empirical_mse) << ','
      << format_number(row.standard_error) << ',' << format_number(row.analytic_mse) << ','
      << format_number(row.empirical_bias_at_probe) << ',' << format_number(row.analytic_bias_at_probe) << ','
      << (include_timing ? format_number(row.wall_time) : std::string()) << '\n';
}

}  // namespace obsest
