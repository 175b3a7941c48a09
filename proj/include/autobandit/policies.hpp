#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "core.hpp"
#include "errors.hpp"
#include "meta_learner.hpp"
#include "rng.hpp"

namespace autobandit {

enum class ScheduleKind { fixed, inverse_n, linear };

inline const char* to_string(ScheduleKind k) {
  switch (k) {
    case ScheduleKind::fixed: return "fixed";
    case ScheduleKind::inverse_n: return "inverse_n";
    case ScheduleKind::linear: return "linear";
  }
  return "?";
}

/// fixed: eps0. inverse_n: min(1, eps0 / n), n the 1-based block index.
/// linear: eps0 * max(0, 1 - t / t_anneal), t the 1-based episode index.
struct EpsilonSchedule {
  ScheduleKind kind = ScheduleKind::linear;
  double epsilon0 = 0.9;
  std::size_t t_anneal = 1000;

  bool operator==(const EpsilonSchedule&) const = default;

  void validate() const {
    if (!(epsilon0 >= 0.0)) throw ConfigError("schedule: epsilon0 must be >= 0");
    if (kind != ScheduleKind::inverse_n && epsilon0 > 1.0) throw ConfigError("schedule: epsilon0 must be <= 1");
    if (kind == ScheduleKind::linear && t_anneal < 1) throw ConfigError("schedule: T_anneal must be >= 1");
  }
};

inline double epsilon_at(const EpsilonSchedule& s, std::size_t t, std::size_t n) {
  double eps = s.epsilon0;
  switch (s.kind) {
    case ScheduleKind::fixed: break;
    case ScheduleKind::inverse_n: eps = std::min(1.0, s.epsilon0 / static_cast<double>(std::max<std::size_t>(n, 1))); break;
    case ScheduleKind::linear:
      eps = s.epsilon0 * std::max(0.0, 1.0 - static_cast<double>(t) / static_cast<double>(s.t_anneal));
      break;
  }
  return std::clamp(eps, 0.0, 1.0);
}

inline void to_json(nlohmann::json& j, const EpsilonSchedule& s) {
  j = nlohmann::json{{"kind", to_string(s.kind)}, {"epsilon0", s.epsilon0}, {"T_anneal", s.t_anneal}};
}

inline void from_json(const nlohmann::json& j, EpsilonSchedule& s) {
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "fixed") s.kind = ScheduleKind::fixed;
  else if (kind == "inverse_n") s.kind = ScheduleKind::inverse_n;
  else if (kind == "linear") s.kind = ScheduleKind::linear;
  else throw ConfigError("unknown schedule kind '" + kind + "'");
  s.epsilon0 = j.value("epsilon0", 0.9);
  s.t_anneal = j.value("T_anneal", std::size_t{1000});
  s.validate();
}

struct Selection {
  ActionId action;
  bool explored = false;
};

/// First index of the maximum.
inline std::size_t argmax(std::span<const double> values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i)
    if (values[i] > values[best]) best = i;
  return best;
}

/// epsilon-greedy over precomputed action values. Always consumes two
/// uniforms: the exploration coin, then the draw mapped to floor(u * K).
inline Selection select_action(std::span<const double> q_values, double epsilon, Rng& rng) {
  const std::size_t k = q_values.size();
  if (k < 1) throw ConfigError("select_action needs at least one action");
  const double coin = rng.uniform();
  const std::size_t uniform_action = rng.index(k);
  if (coin < epsilon) return {ActionId{uniform_action}, true};
  return {ActionId{argmax(q_values)}, false};
}

inline Selection select_action(const QModel& q, const Context& s, double epsilon, std::size_t num_actions, Rng& rng) {
  if (q.num_actions() != num_actions) throw ConfigError("QModel action count differs from K");
  const auto values = q.predict_all(s);
  return select_action(values, epsilon, rng);
}

/// Uniform action; same draws and result as select_action with epsilon = 1.
inline ActionId random_policy(std::size_t num_actions, Rng& rng) {
  if (num_actions < 1) throw ConfigError("random_policy needs K >= 1");
  (void)rng.uniform();
  return ActionId{rng.index(num_actions)};
}

/// Per-action linear reward model trained by squared-loss SGD, one step per
/// observed (x, a, r).
class OnlineLinearBaseline {
 public:
  OnlineLinearBaseline(std::size_t num_actions, std::size_t dim, double learning_rate)
      : weights_(num_actions, std::vector<double>(dim, 0.0)),
        intercepts_(num_actions, 0.0),
        learning_rate_(learning_rate) {
    if (num_actions < 1) throw ConfigError("baseline needs K >= 1");
    if (!(learning_rate > 0.0)) throw ConfigError("baseline learning rate must be > 0");
  }

  std::size_t num_actions() const { return weights_.size(); }
  std::size_t dim() const { return weights_.empty() ? 0 : weights_.front().size(); }
  double learning_rate() const { return learning_rate_; }
  std::span<const double> weights(ActionId a) const { return weights_.at(a.index); }
  double intercept(ActionId a) const { return intercepts_.at(a.index); }

  double predict(std::span<const double> x, ActionId a) const {
    check(x, a);
    const auto& w = weights_[a.index];
    double s = intercepts_[a.index];
    for (std::size_t j = 0; j < w.size(); ++j) s += w[j] * x[j];
    return s;
  }

  std::vector<double> predict_all(std::span<const double> x) const {
    std::vector<double> out(num_actions());
    for (std::size_t a = 0; a < out.size(); ++a) out[a] = predict(x, ActionId{a});
    return out;
  }

  /// w_a += lr * (r - w_a.x - b_a) * x; b_a likewise. Other actions untouched.
  void update(std::span<const double> x, ActionId a, Reward r) {
    const double residual = r.value() - predict(x, a);
    auto& w = weights_[a.index];
    for (std::size_t j = 0; j < w.size(); ++j) w[j] += learning_rate_ * residual * x[j];
    intercepts_[a.index] += learning_rate_ * residual;
  }

  bool operator==(const OnlineLinearBaseline&) const = default;

 private:
  void check(std::span<const double> x, ActionId a) const {
    if (a.index >= weights_.size()) throw ActionError("baseline action out of range");
    if (x.size() != dim()) throw SchemaError("baseline input has wrong width");
  }

  std::vector<std::vector<double>> weights_;
  std::vector<double> intercepts_;
  double learning_rate_;
};

inline OnlineLinearBaseline baseline_update(OnlineLinearBaseline b, std::span<const double> x, ActionId a, Reward r) {
  b.update(x, a, r);
  return b;
}

}  // namespace autobandit
