// Command line front end: run / compare experiments, generate synthetic
// environments and export reward-probability heatmaps.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "autobandit/autobandit.hpp"

namespace ab = autobandit;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitIo = 4;

void report(const std::vector<ab::RunResult>& results, const std::string& label) {
  for (std::size_t i = 0; i < results.size(); ++i)
    for (const auto& w : results[i].warnings) std::cerr << "warning [" << label << " run " << i << "] " << w << '\n';
}

void log_dataset_drops(const ab::ExperimentConfig& cfg) {
  if (const auto* ref = std::get_if<ab::DatasetRef>(&cfg.environment)) {
    const auto ds = ab::load_csv(ref->data_path, ab::load_schema(ref->schema_path));
    if (ds.dropped_rows > 0)
      std::cerr << "dropped " << ds.dropped_rows << " rows with missing values from " << ref->data_path << '\n';
  }
}

ab::ExperimentConfig configure(const std::string& path, const std::string& out, std::size_t threads) {
  auto cfg = ab::load_config(path);
  if (!out.empty()) cfg.output_path = out;
  if (threads > 0) cfg.threads = threads;
  log_dataset_drops(cfg);
  return cfg;
}

std::pair<std::size_t, std::size_t> parse_dims(const std::string& s) {
  const auto comma = s.find(',');
  if (comma == std::string::npos) throw ab::ConfigError("--dims expects i,j");
  try {
    return {std::stoul(s.substr(0, comma)), std::stoul(s.substr(comma + 1))};
  } catch (const std::exception&) {
    throw ab::ConfigError("--dims expects two non-negative integers");
  }
}

ab::SyntheticEnvSpec read_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ab::IoError("cannot open env '" + path + "'");
  try {
    return nlohmann::json::parse(in).get<ab::SyntheticEnvSpec>();
  } catch (const nlohmann::json::exception& e) {
    throw ab::ConfigError(std::string("env JSON: ") + e.what());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Contextual bandit benchmarking with automated Q-function search"};
  app.require_subcommand(1);

  std::string config_path, out_path;
  std::size_t threads = 0;

  auto* run = app.add_subcommand("run", "Run one policy under an experiment config");
  run->add_option("--config", config_path, "Experiment config (JSON)")->required();
  run->add_option("--out", out_path, "Override the config's output_path");
  run->add_option("--threads", threads, "Worker threads for parallel runs (0 = auto)");

  auto* compare = app.add_subcommand("compare", "Run meta-learner, random and online baseline under one config");
  compare->add_option("--config", config_path, "Experiment config (JSON)")->required();
  compare->add_option("--out", out_path, "Override the config's output_path");
  compare->add_option("--threads", threads, "Worker threads for parallel runs (0 = auto)");

  std::size_t d = 2, k = 2, factors = 2;
  std::uint64_t seed = 0;
  double sigma_lo = 0.1, sigma_hi = 0.3, noise = 0.0, base_prob = 0.0;
  auto* gen = app.add_subcommand("gen-env", "Generate a synthetic environment spec");
  gen->add_option("--d", d, "Context dimension")->required();
  gen->add_option("--k", k, "Number of actions")->required();
  gen->add_option("--factors", factors, "Gaussian factors per action")->required();
  gen->add_option("--seed", seed, "Generator seed")->required();
  gen->add_option("--sigma-lo", sigma_lo, "Lower bound of factor widths");
  gen->add_option("--sigma-hi", sigma_hi, "Upper bound of factor widths");
  gen->add_option("--noise", noise, "Per-pull noise on the Bernoulli parameter");
  gen->add_option("--base-prob", base_prob, "Base reward probability");
  gen->add_option("--out", out_path, "Output JSON path")->required();

  std::string env_path, dims = "0,1";
  std::size_t res = 50;
  std::vector<double> fixed;
  auto* heat = app.add_subcommand("heatmap", "Export the mean-over-actions reward probability grid as CSV");
  heat->add_option("--env", env_path, "Synthetic env spec (JSON)")->required();
  heat->add_option("--dims", dims, "Projected dimensions i,j");
  heat->add_option("--res", res, "Grid resolution");
  heat->add_option("--fixed", fixed, "Values for all d dims (projected ones ignored); default 0.5")->delimiter(',');
  heat->add_option("--out", out_path, "Output CSV path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*run) {
      auto cfg = configure(config_path, out_path, threads);
      auto results = ab::run_experiment(cfg);
      report(results, ab::to_string(cfg.policy));
      ab::emit_results(cfg, ab::aggregate_runs(results), results, cfg.output_path);
      std::cout << "wrote " << cfg.output_path << '\n';
    } else if (*compare) {
      auto cfg = configure(config_path, out_path, threads);
      for (const auto& o : ab::run_compare(cfg, cfg.output_path)) {
        report(o.results, ab::to_string(o.policy));
        const auto& avg = o.aggregate.mean_average_regret;
        std::cout << ab::to_string(o.policy) << ": final mean average regret "
                  << (avg.empty() ? 0.0 : avg.back()) << '\n';
      }
      std::cout << "wrote " << cfg.output_path << '\n';
    } else if (*gen) {
      const auto spec = ab::generate_spec(d, k, factors, {sigma_lo, sigma_hi}, noise, seed, base_prob);
      ab::csv::write_file(out_path, nlohmann::json(spec).dump(2) + "\n");
    } else if (*heat) {
      const auto spec = read_spec(env_path);
      if (fixed.empty()) fixed.assign(spec.d, 0.5);
      const auto grid = ab::grid_heatmap(spec, parse_dims(dims), res, fixed);
      ab::csv::write_file(out_path, ab::grid_to_csv(grid));
    }
  } catch (const ab::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    switch (e.category()) {
      case ab::ErrorCategory::config: return kExitConfig;
      case ab::ErrorCategory::data: return kExitData;
      case ab::ErrorCategory::io: return kExitIo;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
