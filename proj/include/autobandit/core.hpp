#pragma once

// Domain types shared by every environment and policy: contexts, actions,
// rewards, the append-only interaction log, and regret accounting.

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "csv.hpp"
#include "errors.hpp"

namespace autobandit {

enum class FeatureKind { numeric, categorical };

inline const char* to_string(FeatureKind k) {
  return k == FeatureKind::numeric ? "numeric" : "categorical";
}

struct Column {
  std::string name;
  FeatureKind kind = FeatureKind::numeric;
  bool operator==(const Column&) const = default;
};

/// Ordered feature columns; fixed per environment.
struct FeatureSchema {
  std::vector<Column> columns;

  std::size_t size() const { return columns.size(); }
  bool operator==(const FeatureSchema&) const = default;

  static FeatureSchema numeric(std::size_t d) {
    FeatureSchema s;
    for (std::size_t i = 0; i < d; ++i) s.columns.push_back({"x" + std::to_string(i), FeatureKind::numeric});
    return s;
  }
};

using FeatureValue = std::variant<double, std::string>;

struct Context {
  std::vector<FeatureValue> values;

  std::size_t size() const { return values.size(); }
  double numeric(std::size_t i) const { return std::get<double>(values[i]); }
  const std::string& token(std::size_t i) const { return std::get<std::string>(values[i]); }
  bool operator==(const Context&) const = default;

  static Context from_numeric(std::span<const double> xs) {
    Context c;
    c.values.assign(xs.begin(), xs.end());
    return c;
  }
};

/// Throws SchemaError unless `c` has the schema's length, per-position kinds
/// and finite numeric values.
inline void validate_context(const FeatureSchema& schema, const Context& c) {
  if (c.size() != schema.size())
    throw SchemaError("context has " + std::to_string(c.size()) + " features, schema expects " +
                      std::to_string(schema.size()));
  for (std::size_t i = 0; i < c.size(); ++i) {
    const bool is_num = std::holds_alternative<double>(c.values[i]);
    if (is_num != (schema.columns[i].kind == FeatureKind::numeric))
      throw SchemaError("feature '" + schema.columns[i].name + "' has the wrong kind");
    if (is_num && !std::isfinite(std::get<double>(c.values[i])))
      throw SchemaError("feature '" + schema.columns[i].name + "' is not finite");
  }
}

struct ActionId {
  std::size_t index = 0;
  bool operator==(const ActionId&) const = default;
};

class Reward {
 public:
  Reward() = default;
  explicit Reward(double v) : value_(v) {
    if (!(v >= 0.0 && v <= 1.0)) throw DataError("reward " + csv::format_number(v) + " outside [0,1]");
  }
  double value() const { return value_; }
  bool operator==(const Reward&) const = default;

 private:
  double value_ = 0.0;
};

struct Episode {
  std::size_t t = 0;  // 1-based
  Context context;
  ActionId action;
  Reward reward;
  double epsilon_used = 0.0;
  bool explored = false;
  bool operator==(const Episode&) const = default;
};

class InteractionLog {
 public:
  /// `first_t` is the step index the first appended episode must carry.
  InteractionLog(FeatureSchema schema, std::size_t num_actions, std::size_t first_t = 1)
      : schema_(std::move(schema)), num_actions_(num_actions), first_t_(first_t) {
    if (num_actions_ < 1) throw ConfigError("action count must be >= 1");
  }

  const FeatureSchema& schema() const { return schema_; }
  std::size_t num_actions() const { return num_actions_; }
  std::size_t first_t() const { return first_t_; }
  const std::vector<Episode>& episodes() const { return episodes_; }
  std::size_t size() const { return episodes_.size(); }
  bool empty() const { return episodes_.empty(); }
  const Episode& operator[](std::size_t i) const { return episodes_[i]; }

  /// Validating in-place append.
  void append(Episode e) {
    validate_context(schema_, e.context);
    if (e.action.index >= num_actions_)
      throw ActionError("action " + std::to_string(e.action.index) + " out of range for K=" +
                        std::to_string(num_actions_));
    if (e.t != first_t_ + episodes_.size())
      throw DataError("episode t=" + std::to_string(e.t) + " does not follow step " +
                      std::to_string(first_t_ + episodes_.size() - 1));
    episodes_.push_back(std::move(e));
  }

  /// Appends another log's episodes, renumbering t to continue this log.
  void extend(const InteractionLog& other) {
    if (other.schema_ != schema_ || other.num_actions_ != num_actions_)
      throw SchemaError("cannot merge logs with different schema or action count");
    episodes_.reserve(episodes_.size() + other.size());
    for (Episode e : other.episodes_) {
      e.t = first_t_ + episodes_.size();
      episodes_.push_back(std::move(e));
    }
  }

  void reserve(std::size_t n) { episodes_.reserve(n); }

 private:
  FeatureSchema schema_;
  std::size_t num_actions_;
  std::size_t first_t_;
  std::vector<Episode> episodes_;
};

inline InteractionLog append_episode(InteractionLog log, Episode e) {
  log.append(std::move(e));
  return log;
}

/// One (best_value, taken_value) pair per step.
struct OracleValue {
  double best = 0.0;
  double taken = 0.0;
};

struct RegretSeries {
  std::vector<double> per_step_regret;
  std::vector<double> cumulative_regret;
  std::vector<double> average_regret;

  std::size_t horizon() const { return per_step_regret.size(); }
};

inline RegretSeries compute_regret(std::span<const OracleValue> oracle) {
  RegretSeries r;
  r.per_step_regret.reserve(oracle.size());
  r.cumulative_regret.reserve(oracle.size());
  r.average_regret.reserve(oracle.size());
  double cum = 0.0;
  for (std::size_t i = 0; i < oracle.size(); ++i) {
    const double step = oracle[i].best - oracle[i].taken;
    cum += step;
    r.per_step_regret.push_back(step);
    r.cumulative_regret.push_back(cum);
    r.average_regret.push_back(cum / static_cast<double>(i + 1));
  }
  return r;
}

inline RegretSeries compute_regret(const InteractionLog& log, std::span<const OracleValue> oracle) {
  if (oracle.size() != log.size())
    throw LengthError("oracle has " + std::to_string(oracle.size()) + " entries for a log of " +
                      std::to_string(log.size()));
  return compute_regret(oracle);
}

/// Serializes a log as `t,action,reward,epsilon,explored,f0,f1,...`;
/// categorical values are quoted.
inline std::string log_to_csv(const InteractionLog& log) {
  std::string out = "t,action,reward,epsilon,explored";
  for (std::size_t i = 0; i < log.schema().size(); ++i) out += ",f" + std::to_string(i);
  out += '\n';
  for (const auto& e : log.episodes()) {
    out += std::to_string(e.t) + ',' + std::to_string(e.action.index) + ',' +
           csv::format_number(e.reward.value()) + ',' + csv::format_number(e.epsilon_used) + ',' +
           (e.explored ? "1" : "0");
    for (const auto& v : e.context.values) {
      out += ',';
      if (const double* d = std::get_if<double>(&v))
        out += csv::format_number(*d);
      else
        out += csv::quote(std::get<std::string>(v));
    }
    out += '\n';
  }
  return out;
}

/// Inverse of log_to_csv given the schema and action count.
inline InteractionLog log_from_csv(const csv::Table& table, const FeatureSchema& schema,
                                   std::size_t num_actions) {
  if (table.header.size() != 5 + schema.size())
    throw SchemaError("log header has " + std::to_string(table.header.size()) + " columns");
  InteractionLog log(schema, num_actions);
  if (!table.rows.empty()) {
    auto first = csv::parse_number(table.rows.front().empty() ? "" : table.rows.front()[0]);
    if (first) log = InteractionLog(schema, num_actions, static_cast<std::size_t>(*first));
  }
  std::size_t row = 0;
  for (const auto& rec : table.rows) {
    ++row;
    if (rec.size() != table.header.size()) throw ParseError(row, "*", "wrong field count");
    auto num = [&](std::size_t col) {
      auto v = csv::parse_number(rec[col]);
      if (!v) throw ParseError(row, table.header[col], "not a number: '" + rec[col] + "'");
      return *v;
    };
    Episode e;
    e.t = static_cast<std::size_t>(num(0));
    e.action.index = static_cast<std::size_t>(num(1));
    e.reward = Reward(num(2));
    e.epsilon_used = num(3);
    e.explored = num(4) != 0.0;
    for (std::size_t i = 0; i < schema.size(); ++i) {
      if (schema.columns[i].kind == FeatureKind::numeric)
        e.context.values.emplace_back(num(5 + i));
      else
        e.context.values.emplace_back(rec[5 + i]);
    }
    log.append(std::move(e));
  }
  return log;
}

}  // namespace autobandit
