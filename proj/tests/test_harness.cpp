#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "obsest/harness.hpp"

using namespace obsest;

namespace {

std::filesystem::path temp_file(const std::string& name, const std::string& content) {
  const auto path = std::filesystem::temp_directory_path() / ("obsest_test_" + name);
  std::ofstream(path) << content;
  return path;
}

std::string csv_of(const ResultRow& row) {
  std::ostringstream out;
  write_csv_row(out, row);
  return out.str();
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.push_back("");
  return cells;
}

}  // namespace

TEST_CASE("builtin observables") {
  const Observable z = load_observable("pauli-z");
  CHECK(z.dim() == 2);
  CHECK(z.matrix()(0, 0) == Complex(1.0));
  CHECK(z.matrix()(1, 1) == Complex(-1.0));

  const Observable w = load_observable("diag(3,0,-3)");
  CHECK(w.dim() == 3);
  CHECK(w.eigenvalues()[0] == 3.0);
  CHECK(w.eigenvalues()[2] == -3.0);

  CHECK(load_observable("identity", 5).dim() == 5);
  const Observable r1 = load_observable("random-hermitian", 4, 9), r2 = load_observable("random-hermitian", 4, 9);
  CHECK((r1.matrix() - r2.matrix()).norm() == 0.0);

  CHECK_THROWS_AS(load_observable("no-such-builtin"), ConfigError);
  CHECK_THROWS_AS(load_observable("diag(1,x)"), ConfigError);
}

TEST_CASE("observable files") {
  const Observable y(pauli(1));
  const auto good = temp_file("y.json", observable_to_json(y).dump(2));
  const Observable loaded = load_observable(good.string());
  CHECK((loaded.matrix() - y.matrix()).norm() == 0.0);

  const auto bad = temp_file("bad.json", "{\n  \"dim\": 2,\n  \"matrix\": [[[1,0],[0,0]] [[0,0],[-1,0]]]\n}\n");
  try {
    load_observable(bad.string());
    FAIL("expected a parse error");
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("line 3") != std::string::npos);
    CHECK(msg.find("column") != std::string::npos);
  }

  CHECK_THROWS_AS(parse_observable_json(R"({"dim": 2, "matrix": [[[1,0],[1,0]],[[0,0],[-1,0]]]})"), ConfigError);
  CHECK_THROWS_AS(parse_observable_json(R"({"dim": 2, "matrix": [[[1,0],[0,0]]]})"), ConfigError);
  CHECK_THROWS_AS(parse_observable_json(R"({"matrix": []})"), ConfigError);
}

TEST_CASE("configuration parsing and validation") {
  const auto j = nlohmann::json::parse(R"({
    "dim": 3, "copies": 4, "trials": 500, "master_seed": 17, "estimator": "sample-average",
    "ensemble": "haar-pure", "observable_source": "random-hermitian", "workers": 2
  })");
  const ExperimentConfig c = config_from_json(j);
  CHECK(c.dim == 3);
  CHECK(c.copies == 4);
  CHECK(c.trials == 500);
  CHECK(c.master_seed == 17);
  CHECK(c.estimator.kind == EstimatorKind::Kind::sample_average);
  CHECK(c.workers == 2);
  CHECK(config_from_json(config_to_json(c)).master_seed == 17);

  const auto mixed = config_from_json(nlohmann::json::parse(
      R"({"estimator": "optimal-mixed-qubit", "ensemble": {"kind": "bloch", "law": "two-point", "radius": 1.0, "weight": 0.6}})"));
  CHECK(mixed.ensemble.kind == Ensemble::Kind::bloch);
  CHECK(mixed.ensemble.second_moment() == doctest::Approx(0.6));
  CHECK(config_from_json(nlohmann::json::parse(R"({"n2": 0.36})")).ensemble.law.radius == doctest::Approx(0.6));

  CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"dims": 3})")), ConfigError);
  CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"estimator": "median"})")), ConfigError);
  CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"ensemble": {"kind": "bloch", "law": "fixed-radius"}})")),
                  ConfigError);

  ExperimentConfig bad;
  bad.dim = 2;
  bad.copies = 2;
  bad.estimator = EstimatorKind::optimal_mixed_qubit(0.5);
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = ExperimentConfig{};
  bad.dim = 2;
  bad.trials = 0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad.trials = 10;
  bad.ensemble = Ensemble::bloch(RadialLaw::fixed_radius(1.5));
  CHECK_THROWS_AS(bad.validate(), ConfigError);

  ExperimentConfig mismatch;
  mismatch.dim = 3;
  mismatch.observable_source = "pauli-z";
  CHECK_THROWS_AS(run_experiment(mismatch), ConfigError);
}

TEST_CASE("identity observable has zero error") {
  for (auto kind : {EstimatorKind::sample_average(), EstimatorKind::optimal_pure()}) {
    ExperimentConfig c;
    c.dim = 3;
    c.copies = 2;
    c.trials = 20000;
    c.observable_source = "identity";
    c.estimator = kind;
    const ResultRow row = run_experiment(c);
    CHECK(row.empirical_mse == 0.0);
    CHECK(row.analytic_mse == 0.0);
    CHECK(row.standard_error == 0.0);
  }
  ExperimentConfig scaled;
  scaled.copies = 3;
  scaled.trials = 5000;
  scaled.observable_source = "diag(2.5,2.5)";
  CHECK(run_experiment(scaled).empirical_mse == 0.0);
}

TEST_CASE("qubit sigma_z headline errors") {
  ExperimentConfig c;
  c.observable_source = "pauli-z";
  c.trials = 1000000;
  c.master_seed = 3;
  c.workers = 4;

  c.estimator = EstimatorKind::optimal_pure();
  const ResultRow opt = run_experiment(c);
  CHECK(opt.analytic_mse == analytic_delta_opt(Observable(pauli(2)), 1));
  CHECK(std::abs(opt.empirical_mse - 2.0 / 9.0) < 3.0 * opt.standard_error);

  c.estimator = EstimatorKind::sample_average();
  const ResultRow av = run_experiment(c);
  CHECK(av.analytic_mse == analytic_delta_av(Observable(pauli(2)), 1));
  CHECK(std::abs(av.empirical_mse - 2.0 / 3.0) < 3.0 * av.standard_error);
  CHECK(av.analytic_bias_at_probe == 0.0);
}

TEST_CASE("results do not depend on the worker count") {
  ExperimentConfig c;
  c.dim = 3;
  c.copies = 3;
  c.trials = 30000;
  c.master_seed = 1234;
  c.observable_source = "random-hermitian";
  c.workers = 1;
  const std::string serial = csv_of(run_experiment(c));
  c.workers = 8;
  CHECK(csv_of(run_experiment(c)) == serial);
  c.workers = 3;
  CHECK(csv_of(run_experiment(c)) == serial);
  c.master_seed = 1235;
  CHECK(csv_of(run_experiment(c)) != serial);
}

TEST_CASE("csv layout") {
  std::ostringstream header;
  write_csv_header(header);
  CHECK(header.str() ==
        "d,N,M,seed,estimator,ensemble,n2,empirical_mse,standard_error,analytic_mse,empirical_bias,analytic_bias,"
        "wall_time_s\n");

  ExperimentConfig c;
  c.trials = 1000;
  const ResultRow pure = run_experiment(c);
  auto cells = split(csv_of(pure).substr(0, csv_of(pure).size() - 1));
  REQUIRE(cells.size() == kCsvColumns.size());
  CHECK(cells[4] == "optimal-pure");
  CHECK(cells[5] == "haar-pure");
  CHECK(cells[6].empty());   // n2 missing for pure runs
  CHECK(cells[12].empty());  // wall time only on request

  std::ostringstream timed;
  write_csv_row(timed, pure, true);
  CHECK(split(timed.str().substr(0, timed.str().size() - 1))[12] != "");

  c.estimator = EstimatorKind::optimal_mixed_qubit(0.0);
  c.ensemble = Ensemble::bloch(RadialLaw::two_point(1.0, 0.36));
  const ResultRow mixed = run_experiment(c);
  cells = split(csv_of(mixed).substr(0, csv_of(mixed).size() - 1));
  CHECK(cells[5] == "bloch:two-point:r=1:w=0.36");
  CHECK(std::stod(cells[6]) == doctest::Approx(0.36));
  CHECK(format_number(0.1) == "0.1");
  CHECK(format_number(std::nan("")) == "");
}

TEST_CASE("sweep ratios") {
  ExperimentConfig base;
  base.observable_source = "pauli-z";
  base.trials = 200000;
  base.master_seed = 8;
  base.workers = 4;
  std::vector<int> copies{1, 2, 3, 4, 5, 6, 7, 8};
  const auto rows = run_sweep(base, copies, {2});
  REQUIRE(rows.size() == 16);
  for (std::size_t k = 0; k < rows.size(); k += 2) {
    const ResultRow& av = rows[k];
    const ResultRow& opt = rows[k + 1];
    REQUIRE(av.config.estimator.kind == EstimatorKind::Kind::sample_average);
    REQUIRE(opt.config.estimator.kind == EstimatorKind::Kind::optimal_pure);
    const int n = av.config.copies;
    const double ratio = av.empirical_mse / opt.empirical_mse;
    const double rel_se = std::hypot(av.standard_error / av.empirical_mse, opt.standard_error / opt.empirical_mse);
    INFO("N = " << n);
    CHECK(std::abs(ratio - (n + 2.0) / n) < 3.0 * rel_se * ratio);
    CHECK(av.analytic_mse / opt.analytic_mse == doctest::Approx((n + 2.0) / n));
  }

  ExperimentConfig four = base;
  four.observable_source = "random-hermitian";
  four.trials = 1000;
  const auto r44 = run_sweep(four, {4}, {4});
  CHECK(r44[1].analytic_mse / r44[0].analytic_mse == doctest::Approx(0.5));
  const auto r81 = run_sweep(four, {1}, {8});
  CHECK(r81[1].analytic_mse / r81[0].analytic_mse == doctest::Approx(1.0 / 9.0));
  // One observable per cell, shared by both estimators.
  CHECK(r44[0].analytic_mse * 4.0 / 8.0 == doctest::Approx(r44[1].analytic_mse));

  CHECK_THROWS_AS(run_sweep(base, {}, {2}), ConfigError);
}

TEST_CASE("analytic report") {
  ExperimentConfig c;
  const auto report = analytic_report(c);
  CHECK(report["delta_opt"].get<double>() == 2.0 / 9.0);
  CHECK(report["delta_av"].get<double>() == 2.0 / 3.0);
  CHECK(report["estimates"][0]["outcome"].get<double>() == 1.0);
  CHECK(report["estimates"][0]["omega_opt"].get<double>() == 1.0 / 3.0);
  CHECK(report["estimates"][0]["omega_av"].get<double>() == 1.0);
  CHECK(report.contains("mixed_qubit"));
}

TEST_CASE("kahan summation") {
  KahanSum k;
  double naive = 0.0;
  k.add(1.0);
  naive += 1.0;
  for (int i = 0; i < 1000000; ++i) {
    k.add(1e-16);
    naive += 1e-16;
  }
  CHECK(naive == 1.0);
  CHECK(k.value() == doctest::Approx(1.0 + 1e-10).epsilon(1e-15));
}
