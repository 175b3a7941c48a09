#pragma once

// Controllable synthetic reward environment: each action's reward
// probability is a base rate plus a sum of weighted isotropic Gaussian
// bumps over the unit context cube, clipped to [0,1].

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "core.hpp"
#include "csv.hpp"
#include "errors.hpp"
#include "rng.hpp"

namespace autobandit {

struct GaussianFactor {
  std::vector<double> mu;
  double sigma = 1.0;
  double weight = 1.0;
  bool operator==(const GaussianFactor&) const = default;
};

struct SyntheticEnvSpec {
  std::size_t d = 1;
  std::size_t num_actions = 1;
  std::vector<std::vector<GaussianFactor>> factors;  // [action][factor]
  double noise_std = 0.0;
  double base_prob = 0.0;
  std::uint64_t seed = 0;

  bool operator==(const SyntheticEnvSpec&) const = default;

  FeatureSchema schema() const { return FeatureSchema::numeric(d); }

  /// Throws ConfigError when an invariant is violated.
  void validate() const {
    if (d < 1) throw ConfigError("synthetic env: d must be >= 1");
    if (num_actions < 1) throw ConfigError("synthetic env: K must be >= 1");
    if (factors.size() != num_actions) throw ConfigError("synthetic env: factors must list every action");
    if (!(noise_std >= 0.0)) throw ConfigError("synthetic env: noise_std must be >= 0");
    if (!(base_prob >= 0.0 && base_prob <= 1.0)) throw ConfigError("synthetic env: base_prob must be in [0,1]");
    for (const auto& per_action : factors)
      for (const auto& f : per_action) {
        if (f.mu.size() != d) throw ConfigError("synthetic env: factor mean has wrong length");
        if (!(f.sigma > 0.0)) throw ConfigError("synthetic env: factor sigma must be > 0");
        if (!(f.weight >= 0.0 && f.weight <= 1.0)) throw ConfigError("synthetic env: factor weight must be in [0,1]");
      }
  }
};

/// Draws a spec: per action, F factors with means uniform on [0,1]^d,
/// sigmas uniform on [sigma_lo, sigma_hi] and weights uniform on [0,1].
inline SyntheticEnvSpec generate_spec(std::size_t d, std::size_t num_actions, std::size_t num_factors,
                                      std::pair<double, double> sigma_range, double noise_std,
                                      std::uint64_t seed, double base_prob = 0.0) {
  const auto [lo, hi] = sigma_range;
  if (d < 1 || num_actions < 1 || num_factors < 1) throw ConfigError("d, K and F must all be >= 1");
  if (!(lo > 0.0 && lo <= hi)) throw ConfigError("sigma range must satisfy 0 < lo <= hi");
  if (!(noise_std >= 0.0)) throw ConfigError("noise_std must be >= 0");
  if (!(base_prob >= 0.0 && base_prob <= 1.0)) throw ConfigError("base_prob must be in [0,1]");

  SyntheticEnvSpec spec;
  spec.d = d;
  spec.num_actions = num_actions;
  spec.noise_std = noise_std;
  spec.base_prob = base_prob;
  spec.seed = seed;
  Rng rng(seed);
  spec.factors.resize(num_actions);
  for (auto& per_action : spec.factors) {
    per_action.resize(num_factors);
    for (auto& f : per_action) {
      f.mu.resize(d);
      for (auto& m : f.mu) m = rng.uniform();
      f.sigma = lo + (hi - lo) * rng.uniform();
      f.weight = rng.uniform();
    }
  }
  return spec;
}

/// d independent uniform draws on [0,1).
inline Context sample_context(const SyntheticEnvSpec& spec, Rng& rng) {
  Context c;
  c.values.reserve(spec.d);
  for (std::size_t i = 0; i < spec.d; ++i) c.values.emplace_back(rng.uniform());
  return c;
}

inline double reward_probability(const SyntheticEnvSpec& spec, std::span<const double> x, ActionId a) {
  if (x.size() != spec.d)
    throw SchemaError("context has " + std::to_string(x.size()) + " dims, env expects " + std::to_string(spec.d));
  if (a.index >= spec.num_actions) throw ActionError("action " + std::to_string(a.index) + " out of range");
  double p = spec.base_prob;
  for (const auto& f : spec.factors[a.index]) {
    double sq = 0.0;
    for (std::size_t i = 0; i < spec.d; ++i) {
      const double diff = x[i] - f.mu[i];
      sq += diff * diff;
    }
    p += f.weight * std::exp(-sq / (2.0 * f.sigma * f.sigma));
  }
  return std::clamp(p, 0.0, 1.0);
}

namespace detail {
inline std::vector<double> numeric_values(const SyntheticEnvSpec& spec, const Context& s) {
  if (s.size() != spec.d)
    throw SchemaError("context has " + std::to_string(s.size()) + " dims, env expects " + std::to_string(spec.d));
  std::vector<double> x(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double* v = std::get_if<double>(&s.values[i]);
    if (!v) throw SchemaError("synthetic contexts are numeric");
    x[i] = *v;
  }
  return x;
}
}  // namespace detail

inline double reward_probability(const SyntheticEnvSpec& spec, const Context& s, ActionId a) {
  const auto x = detail::numeric_values(spec, s);
  return reward_probability(spec, std::span<const double>(x), a);
}

/// Bernoulli draw with parameter clip(p + noise_std * g, 0, 1). Consumes one
/// normal (two uniforms) and then one uniform from `rng`.
inline Reward pull(const SyntheticEnvSpec& spec, const Context& s, ActionId a, Rng& rng) {
  const double p = reward_probability(spec, s, a);
  const double g = rng.normal();
  const double q = std::clamp(p + spec.noise_std * g, 0.0, 1.0);
  return Reward(rng.uniform() < q ? 1.0 : 0.0);
}

struct OptimalAction {
  ActionId action;
  double best_value = 0.0;
};

/// argmax over actions of the reward probability; ties go to the lowest index.
inline OptimalAction optimal_action(const SyntheticEnvSpec& spec, const Context& s) {
  const auto x = detail::numeric_values(spec, s);
  OptimalAction best{ActionId{0}, reward_probability(spec, std::span<const double>(x), ActionId{0})};
  for (std::size_t a = 1; a < spec.num_actions; ++a) {
    const double p = reward_probability(spec, std::span<const double>(x), ActionId{a});
    if (p > best.best_value) best = {ActionId{a}, p};
  }
  return best;
}

using Grid = std::vector<std::vector<double>>;

/// Mean-over-actions reward probability on a resolution x resolution grid of
/// cell centres spanning dims (i, j); rows follow dim i. Remaining dims take
/// their value from `fixed_values` (length d; entries for i and j ignored).
inline Grid grid_heatmap(const SyntheticEnvSpec& spec, std::pair<std::size_t, std::size_t> dims,
                         std::size_t resolution, std::span<const double> fixed_values) {
  const auto [di, dj] = dims;
  if (di >= spec.d || dj >= spec.d || di == dj) throw ConfigError("heatmap dims must be distinct and < d");
  if (resolution < 1) throw ConfigError("heatmap resolution must be >= 1");
  if (fixed_values.size() != spec.d) throw ConfigError("fixed_values must have length d");
  std::vector<double> x(fixed_values.begin(), fixed_values.end());
  Grid g(resolution, std::vector<double>(resolution, 0.0));
  const double res = static_cast<double>(resolution);
  for (std::size_t r = 0; r < resolution; ++r) {
    for (std::size_t c = 0; c < resolution; ++c) {
      x[di] = (static_cast<double>(r) + 0.5) / res;
      x[dj] = (static_cast<double>(c) + 0.5) / res;
      double sum = 0.0;
      for (std::size_t a = 0; a < spec.num_actions; ++a)
        sum += reward_probability(spec, std::span<const double>(x), ActionId{a});
      g[r][c] = sum / static_cast<double>(spec.num_actions);
    }
  }
  return g;
}

inline Grid grid_heatmap(const SyntheticEnvSpec& spec, std::pair<std::size_t, std::size_t> dims,
                         std::size_t resolution) {
  const std::vector<double> mid(spec.d, 0.5);
  return grid_heatmap(spec, dims, resolution, mid);
}

inline std::string grid_to_csv(const Grid& g) {
  std::string out;
  for (const auto& row : g) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out += ',';
      out += csv::format_number(row[c]);
    }
    out += '\n';
  }
  return out;
}

inline void to_json(nlohmann::json& j, const GaussianFactor& f) {
  j = nlohmann::json{{"mu", f.mu}, {"sigma", f.sigma}, {"weight", f.weight}};
}

inline void from_json(const nlohmann::json& j, GaussianFactor& f) {
  j.at("mu").get_to(f.mu);
  j.at("sigma").get_to(f.sigma);
  j.at("weight").get_to(f.weight);
}

inline void to_json(nlohmann::json& j, const SyntheticEnvSpec& s) {
  j = nlohmann::json{{"d", s.d},
                     {"K", s.num_actions},
                     {"base_prob", s.base_prob},
                     {"noise_std", s.noise_std},
                     {"seed", s.seed},
                     {"factors", s.factors}};
}

inline void from_json(const nlohmann::json& j, SyntheticEnvSpec& s) {
  try {
    j.at("d").get_to(s.d);
    j.at("K").get_to(s.num_actions);
    s.base_prob = j.value("base_prob", 0.0);
    s.noise_std = j.value("noise_std", 0.0);
    s.seed = j.value("seed", std::uint64_t{0});
    j.at("factors").get_to(s.factors);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("synthetic env JSON: ") + e.what());
  }
  s.validate();
}

}  // namespace autobandit
