#pragma once

// Block protocol: run a frozen policy for a block of episodes, retrain the
// Q-model on everything gathered so far, repeat. Runs are reshuffled /
// reseeded replicas that execute in parallel and aggregate in run order.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <limits>
#include <memory>
#include <mutex>
#include <numeric>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "core.hpp"
#include "csv.hpp"
#include "dataset_env.hpp"
#include "errors.hpp"
#include "meta_learner.hpp"
#include "policies.hpp"
#include "rng.hpp"
#include "synthetic_env.hpp"

namespace autobandit {

enum class PolicyKind { meta_learner, random, online_baseline };

inline const char* to_string(PolicyKind p) {
  switch (p) {
    case PolicyKind::meta_learner: return "meta_learner";
    case PolicyKind::random: return "random";
    case PolicyKind::online_baseline: return "online_baseline";
  }
  return "?";
}

inline PolicyKind policy_from_string(const std::string& s) {
  if (s == "meta_learner") return PolicyKind::meta_learner;
  if (s == "random") return PolicyKind::random;
  if (s == "online_baseline") return PolicyKind::online_baseline;
  throw ConfigError("unknown policy '" + s + "'");
}

struct DatasetRef {
  std::string schema_path;
  std::string data_path;
  bool operator==(const DatasetRef&) const = default;
};

using EnvironmentConfig = std::variant<SyntheticEnvSpec, DatasetRef>;

struct ExperimentConfig {
  EnvironmentConfig environment = SyntheticEnvSpec{};
  PolicyKind policy = PolicyKind::meta_learner;
  std::size_t block_size = 500;
  std::size_t n_blocks = 10;
  EpsilonSchedule schedule;
  SearchBudget budget;
  std::size_t runs = 1;
  std::uint64_t master_seed = 0;
  std::string output_path = "results";
  bool final_retrain = false;
  double learning_rate = 0.1;  // online baseline
  std::size_t threads = 0;     // 0 => hardware concurrency

  std::size_t horizon() const { return block_size * n_blocks; }
  bool operator==(const ExperimentConfig&) const = default;

  void validate() const {
    if (block_size < 1 || block_size > 1'000'000) throw ConfigError("block_size must be in [1, 1e6]");
    if (n_blocks < 1) throw ConfigError("n_blocks must be >= 1");
    if (runs < 1) throw ConfigError("runs must be >= 1");
    if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be > 0");
    schedule.validate();
    budget.validate();
    if (const auto* spec = std::get_if<SyntheticEnvSpec>(&environment)) spec->validate();
  }
};

// ---------------------------------------------------------------------------
// Config JSON
// ---------------------------------------------------------------------------

namespace detail {
inline std::string resolve_path(const std::string& p, const std::filesystem::path& base_dir) {
  std::filesystem::path path(p);
  if (path.is_relative() && !base_dir.empty()) path = base_dir / path;
  return path.lexically_normal().string();
}
}  // namespace detail

inline nlohmann::json config_to_json(const ExperimentConfig& c) {
  nlohmann::json env;
  if (const auto* spec = std::get_if<SyntheticEnvSpec>(&c.environment)) {
    env = {{"type", "synthetic"}, {"spec", *spec}};
  } else {
    const auto& ref = std::get<DatasetRef>(c.environment);
    env = {{"type", "dataset"}, {"schema", ref.schema_path}, {"data", ref.data_path}};
  }
  return nlohmann::json{
      {"environment", env},
      {"policy", to_string(c.policy)},
      {"block_size", c.block_size},
      {"n_blocks", c.n_blocks},
      {"schedule", c.schedule},
      {"budget",
       {{"max_candidates", c.budget.max_candidates},
        {"cv_folds", c.budget.cv_folds},
        {"holdout_fraction", c.budget.holdout_fraction},
        {"seed", c.budget.seed},
        {"ensemble_k", c.budget.ensemble_k}}},
      {"runs", c.runs},
      {"master_seed", c.master_seed},
      {"output_path", c.output_path},
      {"final_retrain", c.final_retrain},
      {"learning_rate", c.learning_rate},
      {"threads", c.threads},
  };
}

/// Parses a config document. Relative file paths resolve against
/// `base_dir`; a synthetic environment may be given inline (`spec`), by file
/// (`spec_path`) or by generator parameters (`generate`), and is always
/// stored resolved.
inline ExperimentConfig config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {}) {
  ExperimentConfig c;
  try {
    const auto& env = j.at("environment");
    const auto type = env.at("type").get<std::string>();
    if (type == "synthetic") {
      if (env.contains("spec")) {
        c.environment = env.at("spec").get<SyntheticEnvSpec>();
      } else if (env.contains("spec_path")) {
        const auto path = detail::resolve_path(env.at("spec_path").get<std::string>(), base_dir);
        std::ifstream in(path);
        if (!in) throw IoError("cannot open env spec '" + path + "'");
        c.environment = nlohmann::json::parse(in).get<SyntheticEnvSpec>();
      } else {
        const auto& g = env.at("generate");
        c.environment = generate_spec(g.at("d").get<std::size_t>(), g.at("K").get<std::size_t>(),
                                      g.at("F").get<std::size_t>(),
                                      {g.value("sigma_lo", 0.1), g.value("sigma_hi", 0.3)}, g.value("noise_std", 0.0),
                                      g.value("seed", std::uint64_t{0}), g.value("base_prob", 0.0));
      }
    } else if (type == "dataset") {
      c.environment = DatasetRef{detail::resolve_path(env.at("schema").get<std::string>(), base_dir),
                                 detail::resolve_path(env.at("data").get<std::string>(), base_dir)};
    } else {
      throw ConfigError("unknown environment type '" + type + "'");
    }
    c.policy = policy_from_string(j.value("policy", std::string("meta_learner")));
    c.block_size = j.value("block_size", c.block_size);
    c.n_blocks = j.value("n_blocks", c.n_blocks);
    if (j.contains("schedule")) c.schedule = j.at("schedule").get<EpsilonSchedule>();
    if (j.contains("budget")) {
      const auto& b = j.at("budget");
      c.budget.max_candidates = b.value("max_candidates", c.budget.max_candidates);
      c.budget.cv_folds = b.value("cv_folds", c.budget.cv_folds);
      c.budget.holdout_fraction = b.value("holdout_fraction", c.budget.holdout_fraction);
      c.budget.seed = b.value("seed", c.budget.seed);
      c.budget.ensemble_k = b.value("ensemble_k", c.budget.ensemble_k);
    }
    c.runs = j.value("runs", c.runs);
    c.master_seed = j.value("master_seed", c.master_seed);
    c.output_path = j.value("output_path", c.output_path);
    c.final_retrain = j.value("final_retrain", c.final_retrain);
    c.learning_rate = j.value("learning_rate", c.learning_rate);
    c.threads = j.value("threads", c.threads);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("experiment config: ") + e.what());
  }
  c.validate();
  return c;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config '" + path + "' is not valid JSON: " + e.what());
  }
  auto base = std::filesystem::absolute(std::filesystem::path(path)).parent_path();
  return config_from_json(j, base);
}

// ---------------------------------------------------------------------------
// Environment streams
// ---------------------------------------------------------------------------

/// One run's view of an environment: a fixed context sequence plus reward
/// and oracle lookups per step (0-based).
class EnvironmentStream {
 public:
  /// Pre-samples `horizon` contexts; rewards come from a separate stream.
  static EnvironmentStream synthetic(SyntheticEnvSpec spec, std::size_t horizon, std::uint64_t run_seed) {
    EnvironmentStream s;
    Rng ctx_rng(derive_seed(run_seed, "contexts"));
    s.contexts_.reserve(horizon);
    for (std::size_t i = 0; i < horizon; ++i) s.contexts_.push_back(sample_context(spec, ctx_rng));
    s.schema_ = spec.schema();
    s.num_actions_ = spec.num_actions;
    s.reward_rng_.emplace(derive_seed(run_seed, "rewards"));
    s.spec_ = std::make_shared<const SyntheticEnvSpec>(std::move(spec));
    return s;
  }

  static EnvironmentStream dataset(const SupervisedDataset& ds, std::uint64_t run_seed) {
    EnvironmentStream s;
    BanditStream stream = to_bandit(ds, derive_seed(run_seed, "shuffle"));
    s.contexts_.reserve(stream.size());
    for (auto& row : stream.rows) {
      s.contexts_.push_back(std::move(row.context));
      s.labels_.push_back(row.label);
    }
    s.schema_ = ds.schema.features;
    s.num_actions_ = ds.schema.num_classes();
    return s;
  }

  const FeatureSchema& schema() const { return schema_; }
  std::size_t num_actions() const { return num_actions_; }
  std::size_t available() const { return contexts_.size(); }
  bool is_synthetic() const { return spec_ != nullptr; }
  const std::vector<Context>& contexts() const { return contexts_; }

  const Context& context(std::size_t step) const {
    if (step >= contexts_.size())
      throw StreamExhausted("stream exhausted at step " + std::to_string(step + 1) + " of " +
                            std::to_string(contexts_.size()));
    return contexts_[step];
  }

  std::size_t label(std::size_t step) const { return labels_.at(step); }

  Reward pull(std::size_t step, ActionId a) {
    if (spec_) return autobandit::pull(*spec_, context(step), a, *reward_rng_);
    return pull_label(labels_.at(step), a);
  }

  /// Expected values for synthetic streams; (1, realized) for datasets.
  OracleValue oracle(std::size_t step, ActionId a, Reward realized) const {
    if (spec_) {
      const auto& s = context(step);
      return {optimal_action(*spec_, s).best_value, reward_probability(*spec_, s, a)};
    }
    return {1.0, realized.value()};
  }

 private:
  EnvironmentStream() = default;

  FeatureSchema schema_;
  std::size_t num_actions_ = 0;
  std::vector<Context> contexts_;
  std::vector<std::size_t> labels_;
  std::shared_ptr<const SyntheticEnvSpec> spec_;
  std::optional<Rng> reward_rng_;
};

// ---------------------------------------------------------------------------
// Policy state, blocks, retraining
// ---------------------------------------------------------------------------

struct PolicyState {
  PolicyKind kind = PolicyKind::random;
  std::optional<QModel> model;                   // meta_learner; empty => random
  std::optional<OnlineLinearBaseline> baseline;  // online_baseline
  std::optional<Featurizer> context_features;    // online_baseline input map

  static PolicyState make(PolicyKind kind, const EnvironmentStream& env, double learning_rate) {
    PolicyState p;
    p.kind = kind;
    if (kind == PolicyKind::online_baseline) {
      p.context_features = Featurizer::fit(env.schema(), env.contexts(), 0);
      p.baseline.emplace(env.num_actions(), p.context_features->width(), learning_rate);
    }
    return p;
  }
};

struct BlockResult {
  InteractionLog log;
  std::vector<OracleValue> oracle;
};

/// Plays `block_size` episodes starting after step `t_offset`. The Q-model is
/// frozen for the block; the online baseline updates after every episode.
inline BlockResult run_block(PolicyState& policy, EnvironmentStream& env, std::size_t block_size,
                             const EpsilonSchedule& schedule, std::size_t t_offset, std::size_t block_index,
                             Rng& rng) {
  if (block_size < 1) throw ConfigError("block_size must be >= 1");
  BlockResult out{InteractionLog(env.schema(), env.num_actions(), t_offset + 1), {}};
  out.log.reserve(block_size);
  out.oracle.reserve(block_size);
  std::vector<double> x;
  for (std::size_t i = 0; i < block_size; ++i) {
    const std::size_t step = t_offset + i;
    const std::size_t t = step + 1;
    const Context& s = env.context(step);
    Selection sel;
    double eps = 1.0;
    switch (policy.kind) {
      case PolicyKind::random:
        sel = {random_policy(env.num_actions(), rng), true};
        break;
      case PolicyKind::meta_learner:
        if (!policy.model) {
          sel = {random_policy(env.num_actions(), rng), true};
        } else {
          eps = epsilon_at(schedule, t, block_index);
          sel = select_action(*policy.model, s, eps, env.num_actions(), rng);
        }
        break;
      case PolicyKind::online_baseline: {
        eps = epsilon_at(schedule, t, block_index);
        x = policy.context_features->transform(s);
        const auto q = policy.baseline->predict_all(x);
        sel = select_action(q, eps, rng);
        break;
      }
    }
    const Reward r = env.pull(step, sel.action);
    if (policy.kind == PolicyKind::online_baseline) policy.baseline->update(x, sel.action, r);
    out.oracle.push_back(env.oracle(step, sel.action, r));
    out.log.append(Episode{t, s, sel.action, r, eps, sel.explored});
  }
  return out;
}

struct RetrainResult {
  std::optional<QModel> model;
  std::size_t training_size = 0;
  double heldout_mae = std::numeric_limits<double>::quiet_NaN();
  double seconds = 0.0;
  std::string warning;
};

/// Fits a Q-model on the whole accumulated log. A seeded holdout fraction is
/// set aside to search and score the ensemble; the chosen members are then
/// refit on every episode. Too little data yields no model and a warning.
inline RetrainResult retrain(const InteractionLog& accumulated, const SearchBudget& budget) {
  const auto start = std::chrono::steady_clock::now();
  RetrainResult out;
  out.training_size = accumulated.size();
  budget.validate();
  const std::size_t n = accumulated.size();
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  Rng split_rng(derive_seed(budget.seed, "holdout"));
  fisher_yates(perm, split_rng);
  const auto n_hold = static_cast<std::size_t>(std::floor(budget.holdout_fraction * static_cast<double>(n)));
  std::vector<std::size_t> hold(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_hold));
  std::vector<std::size_t> train(perm.begin() + static_cast<std::ptrdiff_t>(n_hold), perm.end());
  std::sort(hold.begin(), hold.end());
  std::sort(train.begin(), train.end());

  if (train.size() < 2 * budget.cv_folds) {
    out.warning = "retrain skipped: " + std::to_string(train.size()) + " training episodes < " +
                  std::to_string(2 * budget.cv_folds) + "; next block uses the random policy";
    return out;
  }

  auto subset = [&](const std::vector<std::size_t>& idx) {
    InteractionLog log(accumulated.schema(), accumulated.num_actions());
    log.reserve(idx.size());
    for (std::size_t i : idx) {
      Episode e = accumulated[i];
      e.t = log.size() + 1;
      log.append(std::move(e));
    }
    return log;
  };

  const InteractionLog train_log = subset(train);
  const Featurizer train_fz = fit_featurizer(train_log);
  const auto ranked = search(train_fz, train_log, budget);
  const QModel scored = build_qmodel(ranked, train_fz, budget.ensemble_k);
  if (!hold.empty()) out.heldout_mae = mean_absolute_error(scored, subset(hold));

  const Featurizer full_fz = fit_featurizer(accumulated);
  const Matrix x = full_fz.design_matrix(accumulated);
  const Vector y = rewards_of(accumulated);
  std::vector<ModelArtifact> members;
  for (const auto& m : scored.members()) {
    ModelArtifact refit = fit_candidate(m.candidate, x, y);
    refit.cv_mae = m.cv_mae;
    members.push_back(std::move(refit));
  }
  out.model.emplace(full_fz, std::move(members));
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

// ---------------------------------------------------------------------------
// Runs
// ---------------------------------------------------------------------------

struct RunResult {
  RegretSeries regret;
  std::vector<OracleValue> oracle;
  InteractionLog log{FeatureSchema{}, 1};
  std::vector<std::size_t> mae_blocks;    // block after which each retrain ran
  std::vector<double> heldout_mae;        // NaN when the retrain was skipped
  std::vector<std::size_t> training_sizes;
  std::vector<double> retrain_seconds;
  std::vector<std::string> warnings;

  const std::vector<Episode>& episodes() const { return log.episodes(); }
};

inline std::uint64_t run_seed(std::uint64_t master_seed, std::size_t run) { return derive_seed(master_seed, run); }

/// Executes all blocks of one run on an already-built environment stream.
inline RunResult run_single(const ExperimentConfig& cfg, EnvironmentStream env, std::uint64_t seed) {
  PolicyState policy = PolicyState::make(cfg.policy, env, cfg.learning_rate);
  Rng policy_rng(derive_seed(seed, "policy"));
  RunResult result;
  result.log = InteractionLog(env.schema(), env.num_actions());
  result.log.reserve(cfg.horizon());
  result.oracle.reserve(cfg.horizon());
  for (std::size_t b = 1; b <= cfg.n_blocks; ++b) {
    BlockResult block =
        run_block(policy, env, cfg.block_size, cfg.schedule, result.log.size(), b, policy_rng);
    result.log.extend(block.log);
    result.oracle.insert(result.oracle.end(), block.oracle.begin(), block.oracle.end());
    const bool retrain_now = cfg.policy == PolicyKind::meta_learner && (b < cfg.n_blocks || cfg.final_retrain);
    if (!retrain_now) continue;
    SearchBudget budget = cfg.budget;
    budget.seed = derive_seed(derive_seed(cfg.budget.seed, seed), b);
    RetrainResult rt = retrain(result.log, budget);
    result.mae_blocks.push_back(b);
    result.heldout_mae.push_back(rt.heldout_mae);
    result.training_sizes.push_back(rt.training_size);
    result.retrain_seconds.push_back(rt.seconds);
    if (!rt.warning.empty()) result.warnings.push_back("block " + std::to_string(b) + ": " + rt.warning);
    policy.model = std::move(rt.model);
  }
  result.regret = compute_regret(result.log, result.oracle);
  return result;
}

/// Loaded environment shared read-only by every run.
using LoadedEnvironment = std::variant<SyntheticEnvSpec, SupervisedDataset>;

inline LoadedEnvironment load_environment(const ExperimentConfig& cfg) {
  if (const auto* spec = std::get_if<SyntheticEnvSpec>(&cfg.environment)) return *spec;
  const auto& ref = std::get<DatasetRef>(cfg.environment);
  return load_csv(ref.data_path, load_schema(ref.schema_path));
}

inline EnvironmentStream make_stream(const LoadedEnvironment& env, std::size_t horizon, std::uint64_t seed) {
  if (const auto* spec = std::get_if<SyntheticEnvSpec>(&env)) return EnvironmentStream::synthetic(*spec, horizon, seed);
  return EnvironmentStream::dataset(std::get<SupervisedDataset>(env), seed);
}

namespace detail {
[[noreturn]] inline void rethrow_with_run(std::exception_ptr ep, std::size_t run) {
  const std::string prefix = "run " + std::to_string(run) + ": ";
  try {
    std::rethrow_exception(ep);
  } catch (const Error& e) {
    throw Error(e.category(), prefix + e.what());
  } catch (const std::exception& e) {
    throw std::runtime_error(prefix + e.what());
  }
}
}  // namespace detail

/// Runs `cfg.runs` independent replicas on `cfg.threads` workers. Run i uses
/// seed derive_seed(master_seed, i), so results do not depend on scheduling.
inline std::vector<RunResult> run_experiment(const ExperimentConfig& cfg, const LoadedEnvironment& env) {
  cfg.validate();
  if (const auto* ds = std::get_if<SupervisedDataset>(&env); ds && ds->size() < cfg.horizon())
    throw StreamExhausted("dataset has " + std::to_string(ds->size()) + " rows, the experiment needs " +
                          std::to_string(cfg.horizon()));
  std::vector<std::optional<RunResult>> slots(cfg.runs);
  std::vector<std::exception_ptr> errors(cfg.runs);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < cfg.runs; i = next++) {
      try {
        const auto seed = run_seed(cfg.master_seed, i);
        slots[i] = run_single(cfg, make_stream(env, cfg.horizon(), seed), seed);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::size_t threads = cfg.threads ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, cfg.runs);
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < threads; ++w) pool.emplace_back(worker);
  }
  std::vector<RunResult> out;
  out.reserve(cfg.runs);
  for (std::size_t i = 0; i < cfg.runs; ++i) {
    if (errors[i]) detail::rethrow_with_run(errors[i], i);
    out.push_back(std::move(*slots[i]));
  }
  return out;
}

inline std::vector<RunResult> run_experiment(const ExperimentConfig& cfg) {
  return run_experiment(cfg, load_environment(cfg));
}

// ---------------------------------------------------------------------------
// Aggregation and output
// ---------------------------------------------------------------------------

struct Aggregate {
  std::vector<double> mean_average_regret;
  std::vector<double> std_average_regret;  // sample std; 0 for one run
  std::vector<double> mean_cumulative_regret;
};

namespace detail {
// Sums in sorted order so the result is independent of input order.
inline double sorted_sum(std::vector<double>& v) {
  std::sort(v.begin(), v.end());
  double s = 0.0;
  for (double x : v) s += x;
  return s;
}
}  // namespace detail

inline Aggregate aggregate_series(const std::vector<const RegretSeries*>& series) {
  if (series.empty()) throw LengthError("aggregate needs at least one run");
  const std::size_t len = series.front()->horizon();
  for (const auto* s : series)
    if (s->horizon() != len) throw LengthError("runs have different horizons");
  Aggregate a;
  a.mean_average_regret.resize(len);
  a.std_average_regret.resize(len);
  a.mean_cumulative_regret.resize(len);
  const double n = static_cast<double>(series.size());
  std::vector<double> buf(series.size());
  for (std::size_t t = 0; t < len; ++t) {
    for (std::size_t r = 0; r < series.size(); ++r) buf[r] = series[r]->average_regret[t];
    const double mean = detail::sorted_sum(buf) / n;
    for (double& v : buf) v = (v - mean) * (v - mean);
    a.mean_average_regret[t] = mean;
    a.std_average_regret[t] = series.size() > 1 ? std::sqrt(detail::sorted_sum(buf) / (n - 1.0)) : 0.0;
    for (std::size_t r = 0; r < series.size(); ++r) buf[r] = series[r]->cumulative_regret[t];
    a.mean_cumulative_regret[t] = detail::sorted_sum(buf) / n;
  }
  return a;
}

inline Aggregate aggregate_runs(const std::vector<RunResult>& results) {
  std::vector<const RegretSeries*> series;
  for (const auto& r : results) series.push_back(&r.regret);
  return aggregate_series(series);
}

/// Per retrain block: mean held-out MAE over the runs where it is finite.
inline std::vector<std::pair<std::size_t, double>> aggregate_mae(const std::vector<RunResult>& results) {
  std::vector<std::pair<std::size_t, double>> out;
  if (results.empty()) return out;
  for (std::size_t k = 0; k < results.front().mae_blocks.size(); ++k) {
    std::vector<double> vals;
    for (const auto& r : results)
      if (k < r.heldout_mae.size() && std::isfinite(r.heldout_mae[k])) vals.push_back(r.heldout_mae[k]);
    const double mean = vals.empty() ? std::numeric_limits<double>::quiet_NaN()
                                     : detail::sorted_sum(vals) / static_cast<double>(vals.size());
    out.emplace_back(results.front().mae_blocks[k], mean);
  }
  return out;
}

inline std::string regret_csv_rows(const Aggregate& a, const std::string& policy_column) {
  std::string out;
  for (std::size_t t = 0; t < a.mean_average_regret.size(); ++t) {
    if (!policy_column.empty()) out += policy_column + ',';
    out += std::to_string(t + 1) + ',' + csv::format_number(a.mean_average_regret[t]) + ',' +
           csv::format_number(a.std_average_regret[t]) + ',' + csv::format_number(a.mean_cumulative_regret[t]) + '\n';
  }
  return out;
}

inline std::string regret_csv(const Aggregate& a, const std::string& policy_column = {}) {
  std::string out = policy_column.empty() ? "" : "policy,";
  out += "t,mean_avg_regret,std_avg_regret,mean_cum_regret\n";
  out += regret_csv_rows(a, policy_column);
  return out;
}

inline std::string run_detail_csv(const RunResult& r, std::size_t block_size) {
  std::string out = "t,block,action,reward,epsilon,explored,best_value,taken_value,regret,cum_regret,avg_regret\n";
  for (std::size_t i = 0; i < r.log.size(); ++i) {
    const auto& e = r.log[i];
    out += std::to_string(e.t) + ',' + std::to_string(i / block_size + 1) + ',' + std::to_string(e.action.index) +
           ',' + csv::format_number(e.reward.value()) + ',' + csv::format_number(e.epsilon_used) + ',' +
           (e.explored ? "1" : "0") + ',' + csv::format_number(r.oracle[i].best) + ',' +
           csv::format_number(r.oracle[i].taken) + ',' + csv::format_number(r.regret.per_step_regret[i]) + ',' +
           csv::format_number(r.regret.cumulative_regret[i]) + ',' + csv::format_number(r.regret.average_regret[i]) +
           '\n';
  }
  return out;
}

inline std::string mae_csv(const std::vector<RunResult>& results) {
  std::string out = "block,heldout_mae\n";
  for (const auto& [block, mae] : aggregate_mae(results))
    out += std::to_string(block) + ',' + csv::format_number(mae) + '\n';
  return out;
}

namespace detail {
inline void make_dirs(const std::filesystem::path& p) {
  std::error_code ec;
  std::filesystem::create_directories(p, ec);
  if (ec) throw IoError("cannot create directory '" + p.string() + "': " + ec.message());
}
}  // namespace detail

/// Writes regret.csv, mae.csv, runs/<i>.csv (per-step detail),
/// runs/<i>_log.csv (interaction log) and manifest.json under `dir`.
inline void emit_results(const ExperimentConfig& cfg, const Aggregate& aggregate, const std::vector<RunResult>& results,
                         const std::filesystem::path& dir) {
  detail::make_dirs(dir / "runs");
  csv::write_file((dir / "regret.csv").string(), regret_csv(aggregate));
  csv::write_file((dir / "mae.csv").string(), mae_csv(results));
  for (std::size_t i = 0; i < results.size(); ++i) {
    csv::write_file((dir / "runs" / (std::to_string(i) + ".csv")).string(), run_detail_csv(results[i], cfg.block_size));
    csv::write_file((dir / "runs" / (std::to_string(i) + "_log.csv")).string(), log_to_csv(results[i].log));
  }
  csv::write_file((dir / "manifest.json").string(), config_to_json(cfg).dump(2) + "\n");
}

struct PolicyOutcome {
  PolicyKind policy;
  std::vector<RunResult> results;
  Aggregate aggregate;
};

/// Runs the meta-learner, random and online-baseline policies under one
/// config. Each policy's files go to <output>/<policy>/, and a combined
/// regret.csv with a leading `policy` column goes to <output>/.
inline std::vector<PolicyOutcome> run_compare(const ExperimentConfig& cfg, const std::filesystem::path& out_dir) {
  const LoadedEnvironment env = load_environment(cfg);
  std::vector<PolicyOutcome> outcomes;
  std::string combined = "policy,t,mean_avg_regret,std_avg_regret,mean_cum_regret\n";
  for (PolicyKind p : {PolicyKind::meta_learner, PolicyKind::random, PolicyKind::online_baseline}) {
    ExperimentConfig pc = cfg;
    pc.policy = p;
    auto results = run_experiment(pc, env);
    auto agg = aggregate_runs(results);
    emit_results(pc, agg, results, out_dir / to_string(p));
    combined += regret_csv_rows(agg, to_string(p));
    outcomes.push_back({p, std::move(results), std::move(agg)});
  }
  detail::make_dirs(out_dir);
  csv::write_file((out_dir / "regret.csv").string(), combined);
  csv::write_file((out_dir / "manifest.json").string(), config_to_json(cfg).dump(2) + "\n");
  return outcomes;
}

}  // namespace autobandit
