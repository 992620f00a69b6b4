// obsest: closed forms, Monte Carlo experiments and exact oracle checks for
// estimating an observable's expectation value from N copies of a pure state.

#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "obsest/harness.hpp"
#include "obsest/verify.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitVerify = 2;

struct Overrides {
  std::string config_path;
  std::optional<int> dim, copies, workers;
  std::optional<std::int64_t> trials;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> estimator, observable, law;
  std::optional<double> n2;
  std::string out;
  bool timing = false;
  std::vector<int> sweep_copies{1, 2, 4, 8};
  std::vector<int> sweep_dims{2, 3, 4};
  std::string level = "fast";
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config_path, "JSON configuration file");
  cmd->add_option("--dim", o.dim, "local dimension d");
  cmd->add_option("--copies", o.copies, "number of copies N");
  cmd->add_option("--trials", o.trials, "Monte Carlo trials M");
  cmd->add_option("--seed", o.seed, "master seed");
  cmd->add_option("--estimator", o.estimator, "sample-average | optimal-pure | optimal-mixed-qubit");
  cmd->add_option("--observable", o.observable, "builtin name, diag(...) or JSON observable file");
  cmd->add_option("--n2", o.n2, "<n^2> of an isotropic Bloch-ball ensemble (qubit, N = 1)");
  cmd->add_option("--law", o.law, "radial law realising --n2: fixed-radius (default) | two-point");
  cmd->add_option("--workers", o.workers, "worker threads");
  cmd->add_option("--out", o.out, "output path (default stdout)");
}

obsest::ExperimentConfig build_config(const Overrides& o) {
  obsest::ExperimentConfig c;
  if (!o.config_path.empty()) c = obsest::load_config(o.config_path);
  if (o.dim) c.dim = *o.dim;
  if (o.copies) c.copies = *o.copies;
  if (o.trials) c.trials = *o.trials;
  if (o.seed) c.master_seed = *o.seed;
  if (o.workers) c.workers = *o.workers;
  if (o.observable) c.observable_source = *o.observable;
  if (o.estimator) {
    try {
      c.estimator.kind = obsest::parse_estimator_kind(*o.estimator);
    } catch (const std::invalid_argument& e) {
      throw obsest::ConfigError(e.what());
    }
  }
  if (o.n2) {
    if (!(*o.n2 >= 0.0 && *o.n2 <= 1.0)) throw obsest::ConfigError("--n2 must lie in [0, 1]");
    const std::string law = o.law.value_or("fixed-radius");
    if (law == "fixed-radius")
      c.ensemble = obsest::Ensemble::bloch(obsest::RadialLaw::fixed_radius(std::sqrt(*o.n2)));
    else if (law == "two-point")
      c.ensemble = obsest::Ensemble::bloch(obsest::RadialLaw::two_point(1.0, *o.n2));
    else
      throw obsest::ConfigError("--law must be fixed-radius or two-point");
  } else if (o.law) {
    if (*o.law == "uniform-ball")
      c.ensemble = obsest::Ensemble::bloch(obsest::RadialLaw::uniform_ball());
    else if (*o.law == "pure-surface")
      c.ensemble = obsest::Ensemble::bloch(obsest::RadialLaw::pure_surface());
    else
      throw obsest::ConfigError("--law without --n2 must be uniform-ball or pure-surface");
  }
  return c;
}

class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty()) {
      file_.open(path);
      if (!file_) throw obsest::ConfigError("cannot open output file '" + path + "'");
    }
  }
  std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

 private:
  std::ofstream file_;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Optimal estimation of an observable's expectation value from N copies of a pure state"};
  app.require_subcommand(1);
  Overrides o;

  auto* analytic = app.add_subcommand("analytic", "print the closed forms for a configuration");
  auto* simulate = app.add_subcommand("simulate", "run one Monte Carlo experiment, CSV output");
  auto* sweep = app.add_subcommand("sweep", "run both estimators over a (d, N) grid, CSV output");
  auto* verify = app.add_subcommand("verify", "run the exact symmetric-subspace checks, JSON lines output");
  for (auto* cmd : {analytic, simulate, sweep, verify}) add_common(cmd, o);
  for (auto* cmd : {simulate, sweep}) cmd->add_flag("--timing", o.timing, "fill the wall_time_s column");
  auto* sweep_copies = sweep->add_option("--sweep-copies", o.sweep_copies, "N values")->delimiter(',');
  auto* sweep_dims = sweep->add_option("--sweep-dims", o.sweep_dims, "d values")->delimiter(',');
  verify->add_option("--level", o.level, "fast | full");

  CLI11_PARSE(app, argc, argv);

  try {
    if (verify->parsed()) {
      obsest::VerifyOptions opts;
      opts.level = obsest::parse_verify_level(o.level);
      opts.seed = o.seed.value_or(0);
      Output out(o.out);
      const auto results = obsest::run_verify(opts);
      for (const auto& r : results) out.stream() << obsest::to_json(r).dump() << '\n';
      return obsest::all_passed(results) ? kExitOk : kExitVerify;
    }

    obsest::ExperimentConfig config = build_config(o);
    Output out(o.out);
    if (analytic->parsed()) {
      out.stream() << obsest::analytic_report(config).dump(2) << '\n';
    } else if (simulate->parsed()) {
      const auto row = obsest::run_experiment(config);
      obsest::write_csv_header(out.stream());
      obsest::write_csv_row(out.stream(), row, o.timing);
    } else if (sweep->parsed()) {
      // A "sweep": {"copies": [...], "dims": [...]} block in the config file
      // supplies the grid unless the flags override it.
      if (!o.config_path.empty()) {
        std::ifstream in(o.config_path);
        const auto j = nlohmann::json::parse(in, nullptr, false);
        if (j.is_object() && j.contains("sweep")) {
          const auto& g = j.at("sweep");
          if (sweep_copies->count() == 0 && g.contains("copies")) o.sweep_copies = g.at("copies").get<std::vector<int>>();
          if (sweep_dims->count() == 0 && g.contains("dims")) o.sweep_dims = g.at("dims").get<std::vector<int>>();
        }
      }
      const auto rows = obsest::run_sweep(config, o.sweep_copies, o.sweep_dims);
      obsest::write_csv_header(out.stream());
      for (const auto& row : rows) obsest::write_csv_row(out.stream(), row, o.timing);
    }
  } catch (const obsest::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::length_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  }
  return kExitOk;
}
