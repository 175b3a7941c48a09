#pragma once

// Desk-scale model search for the Q-function: automatic featurization,
// a fixed candidate grid over {constant, ridge, CART tree}, seeded k-fold
// cross-validation by mean absolute error, and a top-k averaged ensemble.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "core.hpp"
#include "errors.hpp"
#include "rng.hpp"

namespace autobandit {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// ---------------------------------------------------------------------------
// Featurizer
// ---------------------------------------------------------------------------

struct ColumnTransform {
  FeatureKind kind = FeatureKind::numeric;
  double mean = 0.0;
  double stddev = 0.0;               // 0 => column emits constant 0
  std::vector<std::string> vocab;    // sorted; categorical only
  std::size_t offset = 0;
  std::size_t width = 0;
  bool operator==(const ColumnTransform&) const = default;
};

/// Maps (context, action) to a dense row: standardized numerics, one-hot
/// categoricals over the training vocabulary, then a one-hot action block.
class Featurizer {
 public:
  Featurizer() = default;

  /// Fits transform parameters from contexts only. `num_actions` == 0 omits
  /// the action block.
  static Featurizer fit(const FeatureSchema& schema, std::span<const Context> contexts,
                        std::size_t num_actions) {
    if (contexts.empty()) throw DataError("cannot fit a featurizer on no data");
    Featurizer f;
    f.schema_ = schema;
    f.num_actions_ = num_actions;
    const double n = static_cast<double>(contexts.size());
    std::size_t offset = 0;
    for (std::size_t c = 0; c < schema.size(); ++c) {
      ColumnTransform t;
      t.kind = schema.columns[c].kind;
      t.offset = offset;
      if (t.kind == FeatureKind::numeric) {
        double sum = 0.0;
        for (const auto& ctx : contexts) {
          validate_context(schema, ctx);
          sum += ctx.numeric(c);
        }
        t.mean = sum / n;
        double ss = 0.0;
        for (const auto& ctx : contexts) {
          const double diff = ctx.numeric(c) - t.mean;
          ss += diff * diff;
        }
        t.stddev = std::sqrt(ss / n);
        if (!(t.stddev > 1e-12 * std::max(1.0, std::abs(t.mean)))) t.stddev = 0.0;
        t.width = 1;
      } else {
        std::vector<std::string> vocab;
        for (const auto& ctx : contexts) {
          validate_context(schema, ctx);
          vocab.push_back(ctx.token(c));
        }
        std::sort(vocab.begin(), vocab.end());
        vocab.erase(std::unique(vocab.begin(), vocab.end()), vocab.end());
        t.vocab = std::move(vocab);
        t.width = t.vocab.size();
      }
      offset += t.width;
      f.columns_.push_back(std::move(t));
    }
    f.action_offset_ = offset;
    f.width_ = offset + num_actions;
    return f;
  }

  const FeatureSchema& schema() const { return schema_; }
  const std::vector<ColumnTransform>& columns() const { return columns_; }
  std::size_t num_actions() const { return num_actions_; }
  std::size_t width() const { return width_; }
  std::size_t action_offset() const { return action_offset_; }

  /// Column range [offset, offset+width) for input column `c`; c ==
  /// schema().size() addresses the action block.
  std::pair<std::size_t, std::size_t> block(std::size_t c) const {
    if (c == columns_.size()) return {action_offset_, num_actions_};
    return {columns_[c].offset, columns_[c].width};
  }

  void transform_into(const Context& s, std::size_t action, std::span<double> out) const {
    validate_context(schema_, s);
    if (num_actions_ > 0 && action >= num_actions_) throw ActionError("action out of range for featurizer");
    std::fill(out.begin(), out.end(), 0.0);
    for (std::size_t c = 0; c < columns_.size(); ++c) {
      const auto& t = columns_[c];
      if (t.kind == FeatureKind::numeric) {
        out[t.offset] = t.stddev > 0.0 ? (s.numeric(c) - t.mean) / t.stddev : 0.0;
      } else {
        auto it = std::lower_bound(t.vocab.begin(), t.vocab.end(), s.token(c));
        if (it != t.vocab.end() && *it == s.token(c))
          out[t.offset + static_cast<std::size_t>(it - t.vocab.begin())] = 1.0;
      }
    }
    if (num_actions_ > 0) out[action_offset_ + action] = 1.0;
  }

  std::vector<double> transform(const Context& s, std::size_t action = 0) const {
    std::vector<double> out(width_);
    transform_into(s, action, out);
    return out;
  }

  Matrix design_matrix(const InteractionLog& log) const {
    Matrix x(static_cast<Eigen::Index>(log.size()), static_cast<Eigen::Index>(width_));
    std::vector<double> row(width_);
    for (std::size_t i = 0; i < log.size(); ++i) {
      transform_into(log[i].context, log[i].action.index, row);
      for (std::size_t j = 0; j < width_; ++j) x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = row[j];
    }
    return x;
  }

  bool operator==(const Featurizer&) const = default;

  friend void to_json(nlohmann::json& j, const Featurizer& f);
  friend void from_json(const nlohmann::json& j, Featurizer& f);

 private:
  FeatureSchema schema_;
  std::vector<ColumnTransform> columns_;
  std::size_t num_actions_ = 0;
  std::size_t action_offset_ = 0;
  std::size_t width_ = 0;
};

inline Featurizer fit_featurizer(const InteractionLog& log) {
  if (log.empty()) throw DataError("cannot fit a featurizer on an empty log");
  std::vector<Context> contexts;
  contexts.reserve(log.size());
  for (const auto& e : log.episodes()) contexts.push_back(e.context);
  return Featurizer::fit(log.schema(), contexts, log.num_actions());
}

inline Vector rewards_of(const InteractionLog& log) {
  Vector y(static_cast<Eigen::Index>(log.size()));
  for (std::size_t i = 0; i < log.size(); ++i) y(static_cast<Eigen::Index>(i)) = log[i].reward.value();
  return y;
}

// ---------------------------------------------------------------------------
// Candidates and fitted artifacts
// ---------------------------------------------------------------------------

enum class Family { constant = 0, ridge = 1, tree = 2 };

inline const char* to_string(Family f) {
  switch (f) {
    case Family::constant: return "constant";
    case Family::ridge: return "ridge";
    case Family::tree: return "tree";
  }
  return "?";
}

struct CandidateSpec {
  Family family = Family::constant;
  double lambda = 0.0;        // ridge
  std::size_t max_depth = 0;  // tree
  std::size_t min_leaf = 1;   // tree

  static CandidateSpec constant() { return {}; }
  static CandidateSpec ridge(double lambda) { return {Family::ridge, lambda, 0, 1}; }
  static CandidateSpec tree(std::size_t max_depth, std::size_t min_leaf) {
    return {Family::tree, 0.0, max_depth, min_leaf};
  }

  bool operator==(const CandidateSpec&) const = default;

  std::string label() const {
    switch (family) {
      case Family::constant: return "constant";
      case Family::ridge: return "ridge(lambda=" + csv::format_number(lambda) + ")";
      case Family::tree:
        return "tree(max_depth=" + std::to_string(max_depth) + ",min_leaf=" + std::to_string(min_leaf) + ")";
    }
    return "?";
  }
};

/// The search grid, in ranking tie-break order: constant, ridge by ascending
/// lambda, tree by ascending (max_depth, min_leaf).
inline std::vector<CandidateSpec> candidate_grid() {
  std::vector<CandidateSpec> g{CandidateSpec::constant()};
  for (double l : {0.01, 0.1, 1.0, 10.0}) g.push_back(CandidateSpec::ridge(l));
  for (std::size_t depth : {2, 4, 6, 8})
    for (std::size_t leaf : {5, 20}) g.push_back(CandidateSpec::tree(depth, leaf));
  return g;
}

struct TreeNode {
  int feature = -1;  // -1 => leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;
  bool operator==(const TreeNode&) const = default;
};

struct ModelArtifact {
  CandidateSpec candidate;
  double constant = 0.0;
  std::vector<double> weights;
  double intercept = 0.0;
  std::vector<TreeNode> nodes;
  double cv_mae = 0.0;

  /// Unclipped prediction for one featurized row.
  double predict(std::span<const double> x) const {
    switch (candidate.family) {
      case Family::constant: return constant;
      case Family::ridge: {
        double s = intercept;
        for (std::size_t j = 0; j < weights.size(); ++j) s += weights[j] * x[j];
        return s;
      }
      case Family::tree: {
        int n = 0;
        while (nodes[static_cast<std::size_t>(n)].feature >= 0) {
          const auto& node = nodes[static_cast<std::size_t>(n)];
          n = x[static_cast<std::size_t>(node.feature)] <= node.threshold ? node.left : node.right;
        }
        return nodes[static_cast<std::size_t>(n)].value;
      }
    }
    return constant;
  }

  double predict_row(const Matrix& x, Eigen::Index i) const {
    std::vector<double> row(static_cast<std::size_t>(x.cols()));
    for (Eigen::Index j = 0; j < x.cols(); ++j) row[static_cast<std::size_t>(j)] = x(i, j);
    return predict(row);
  }

  bool operator==(const ModelArtifact&) const = default;
};

namespace detail {

inline double mean_of(const Vector& y, std::span<const std::size_t> idx) {
  double s = 0.0;
  for (std::size_t i : idx) s += y(static_cast<Eigen::Index>(i));
  return idx.empty() ? 0.0 : s / static_cast<double>(idx.size());
}

class TreeBuilder {
 public:
  TreeBuilder(const Matrix& x, const Vector& y, std::size_t max_depth, std::size_t min_leaf)
      : x_(x), y_(y), max_depth_(max_depth), min_leaf_(std::max<std::size_t>(1, min_leaf)) {}

  std::vector<TreeNode> build(std::vector<std::size_t> idx) {
    grow(std::move(idx), 0);
    return std::move(nodes_);
  }

 private:
  struct Split {
    int feature = -1;
    double threshold = 0.0;
    double sse = 0.0;
  };

  int grow(std::vector<std::size_t> idx, std::size_t depth) {
    const int id = static_cast<int>(nodes_.size());
    nodes_.push_back(TreeNode{});
    nodes_.back().value = mean_of(y_, idx);
    if (depth >= max_depth_ || idx.size() < 2 * min_leaf_) return id;
    const Split s = best_split(idx);
    if (s.feature < 0) return id;
    std::vector<std::size_t> left, right;
    for (std::size_t i : idx)
      (x_(static_cast<Eigen::Index>(i), s.feature) <= s.threshold ? left : right).push_back(i);
    idx.clear();
    idx.shrink_to_fit();
    const int l = grow(std::move(left), depth + 1);
    const int r = grow(std::move(right), depth + 1);
    auto& node = nodes_[static_cast<std::size_t>(id)];
    node.feature = s.feature;
    node.threshold = s.threshold;
    node.left = l;
    node.right = r;
    return id;
  }

  // Lowest left+right SSE over all features and midpoints between distinct
  // sorted values; first feature / lowest threshold wins ties. Returns no
  // split unless SSE strictly improves.
  Split best_split(const std::vector<std::size_t>& idx) const {
    const std::size_t n = idx.size();
    double total = 0.0, total_sq = 0.0;
    for (std::size_t i : idx) {
      const double v = y_(static_cast<Eigen::Index>(i));
      total += v;
      total_sq += v * v;
    }
    const double parent_sse = total_sq - total * total / static_cast<double>(n);
    Split best;
    best.sse = parent_sse - 1e-12 * std::max(1.0, parent_sse);
    std::vector<std::pair<double, double>> col(n);
    for (Eigen::Index f = 0; f < x_.cols(); ++f) {
      for (std::size_t k = 0; k < n; ++k) col[k] = {x_(static_cast<Eigen::Index>(idx[k]), f), y_(static_cast<Eigen::Index>(idx[k]))};
      std::sort(col.begin(), col.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
      if (col.front().first == col.back().first) continue;
      double ls = 0.0, lsq = 0.0;
      for (std::size_t k = 0; k + 1 < n; ++k) {
        ls += col[k].second;
        lsq += col[k].second * col[k].second;
        const std::size_t nl = k + 1, nr = n - nl;
        if (nl < min_leaf_) continue;
        if (nr < min_leaf_) break;
        if (col[k].first == col[k + 1].first) continue;
        const double rs = total - ls, rsq = total_sq - lsq;
        const double sse = (lsq - ls * ls / static_cast<double>(nl)) + (rsq - rs * rs / static_cast<double>(nr));
        if (sse < best.sse) {
          best.sse = sse;
          best.feature = static_cast<int>(f);
          best.threshold = 0.5 * (col[k].first + col[k + 1].first);
        }
      }
    }
    return best;
  }

  const Matrix& x_;
  const Vector& y_;
  std::size_t max_depth_;
  std::size_t min_leaf_;
  std::vector<TreeNode> nodes_;
};

inline ModelArtifact fit_on_rows(const CandidateSpec& c, const Matrix& x, const Vector& y,
                                 std::span<const std::size_t> rows) {
  if (rows.empty()) throw DataError("cannot fit a model on zero rows");
  ModelArtifact m;
  m.candidate = c;
  const double ybar = mean_of(y, rows);
  m.constant = ybar;
  if (c.family == Family::constant) return m;

  if (c.family == Family::ridge) {
    const auto p = x.cols();
    const auto n = static_cast<Eigen::Index>(rows.size());
    Matrix xs(n, p);
    Vector ys(n);
    for (Eigen::Index k = 0; k < n; ++k) {
      xs.row(k) = x.row(static_cast<Eigen::Index>(rows[static_cast<std::size_t>(k)]));
      ys(k) = y(static_cast<Eigen::Index>(rows[static_cast<std::size_t>(k)]));
    }
    const Eigen::RowVectorXd xbar = xs.colwise().mean();
    xs.rowwise() -= xbar;
    ys.array() -= ybar;
    Vector w = Vector::Zero(p);
    if (xs.cwiseAbs().maxCoeff() > 0.0) {
      Matrix a = xs.transpose() * xs;
      a.diagonal().array() += c.lambda;
      const Vector rhs = xs.transpose() * ys;
      w = a.ldlt().solve(rhs);
      if (!w.allFinite() || c.lambda <= 0.0) w = a.completeOrthogonalDecomposition().solve(rhs);
      if (!w.allFinite()) w.setZero();
    }
    m.weights.assign(w.data(), w.data() + w.size());
    m.intercept = ybar - xbar.dot(w);
    return m;
  }

  TreeBuilder builder(x, y, c.max_depth, c.min_leaf);
  m.nodes = builder.build(std::vector<std::size_t>(rows.begin(), rows.end()));
  return m;
}

}  // namespace detail

/// Fits one candidate on all rows of (x, y). Ridge leaves the intercept
/// unpenalized; identical rows degrade every family to the mean.
inline ModelArtifact fit_candidate(const CandidateSpec& c, const Matrix& x, const Vector& y) {
  if (x.rows() != y.size() || y.size() < 1) throw DataError("design matrix and targets must be non-empty and aligned");
  std::vector<std::size_t> rows(static_cast<std::size_t>(y.size()));
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  return detail::fit_on_rows(c, x, y, rows);
}

/// Mean over folds of the per-fold MAE of clipped predictions. Folds are
/// contiguous slices of a seeded shuffle of the row indices.
inline double cross_validate(const CandidateSpec& c, const Matrix& x, const Vector& y, std::size_t folds,
                             Rng& rng) {
  const auto n = static_cast<std::size_t>(y.size());
  if (folds < 2) throw ConfigError("cross-validation needs at least 2 folds");
  if (n < folds || x.rows() != y.size())
    throw DataError("cross-validation needs at least " + std::to_string(folds) + " rows");
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  fisher_yates(perm, rng);
  double total = 0.0;
  std::vector<std::size_t> train;
  std::vector<double> row(static_cast<std::size_t>(x.cols()));
  for (std::size_t f = 0; f < folds; ++f) {
    const std::size_t lo = f * n / folds, hi = (f + 1) * n / folds;
    train.clear();
    train.insert(train.end(), perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(lo));
    train.insert(train.end(), perm.begin() + static_cast<std::ptrdiff_t>(hi), perm.end());
    const ModelArtifact m = detail::fit_on_rows(c, x, y, train);
    double err = 0.0;
    for (std::size_t k = lo; k < hi; ++k) {
      const auto i = static_cast<Eigen::Index>(perm[k]);
      for (Eigen::Index j = 0; j < x.cols(); ++j) row[static_cast<std::size_t>(j)] = x(i, j);
      err += std::abs(std::clamp(m.predict(row), 0.0, 1.0) - y(i));
    }
    total += err / static_cast<double>(hi - lo);
  }
  return total / static_cast<double>(folds);
}

// ---------------------------------------------------------------------------
// Search and ensembling
// ---------------------------------------------------------------------------

struct SearchBudget {
  std::size_t max_candidates = 13;
  std::size_t cv_folds = 5;
  double holdout_fraction = 0.2;
  std::uint64_t seed = 0;
  std::size_t ensemble_k = 3;

  bool operator==(const SearchBudget&) const = default;

  void validate() const {
    if (max_candidates < 1) throw ConfigError("budget: max_candidates must be >= 1");
    if (cv_folds < 2) throw ConfigError("budget: cv_folds must be >= 2");
    if (!(holdout_fraction >= 0.0 && holdout_fraction < 1.0)) throw ConfigError("budget: holdout_fraction must be in [0,1)");
    if (ensemble_k < 1) throw ConfigError("budget: ensemble_k must be >= 1");
  }
};

/// The candidates a budget evaluates: the full grid, or a seeded sample of
/// `max_candidates` of it kept in grid order.
inline std::vector<CandidateSpec> budgeted_candidates(const SearchBudget& budget) {
  auto grid = candidate_grid();
  if (budget.max_candidates >= grid.size()) return grid;
  std::vector<std::size_t> idx(grid.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  Rng rng(derive_seed(budget.seed, "candidates"));
  fisher_yates(idx, rng);
  idx.resize(budget.max_candidates);
  std::sort(idx.begin(), idx.end());
  std::vector<CandidateSpec> out;
  for (std::size_t i : idx) out.push_back(grid[i]);
  return out;
}

/// Cross-validates every budgeted candidate on the same seeded folds, refits
/// each on all rows and returns them by ascending cv_mae (grid order on ties).
inline std::vector<ModelArtifact> search(const Featurizer& featurizer, const InteractionLog& log,
                                         const SearchBudget& budget) {
  budget.validate();
  if (log.size() < 2 * budget.cv_folds)
    throw DataError("search needs at least " + std::to_string(2 * budget.cv_folds) + " episodes, got " +
                    std::to_string(log.size()));
  const Matrix x = featurizer.design_matrix(log);
  const Vector y = rewards_of(log);
  std::vector<ModelArtifact> ranked;
  for (const auto& c : budgeted_candidates(budget)) {
    Rng fold_rng(derive_seed(budget.seed, "cv"));
    const double mae = cross_validate(c, x, y, budget.cv_folds, fold_rng);
    ModelArtifact m = fit_candidate(c, x, y);
    m.cv_mae = mae;
    ranked.push_back(std::move(m));
  }
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const ModelArtifact& a, const ModelArtifact& b) { return a.cv_mae < b.cv_mae; });
  return ranked;
}

inline std::vector<ModelArtifact> search(const InteractionLog& log, const SearchBudget& budget) {
  return search(fit_featurizer(log), log, budget);
}

/// Ensemble Q(s,a): clipped mean of the member predictions.
class QModel {
 public:
  QModel(Featurizer featurizer, std::vector<ModelArtifact> members)
      : featurizer_(std::move(featurizer)), members_(std::move(members)) {
    if (members_.empty()) throw ConfigError("a QModel needs at least one member");
  }

  const Featurizer& featurizer() const { return featurizer_; }
  const std::vector<ModelArtifact>& members() const { return members_; }
  std::size_t k() const { return members_.size(); }
  std::size_t num_actions() const { return featurizer_.num_actions(); }

  double predict_row(std::span<const double> x) const {
    double s = 0.0;
    for (const auto& m : members_) s += m.predict(x);
    return std::clamp(s / static_cast<double>(members_.size()), 0.0, 1.0);
  }

  double predict(const Context& s, ActionId a) const {
    std::vector<double> row(featurizer_.width());
    featurizer_.transform_into(s, a.index, row);
    return predict_row(row);
  }

  /// Q(s, a) for every action, featurizing the context once.
  std::vector<double> predict_all(const Context& s) const {
    std::vector<double> row(featurizer_.width());
    featurizer_.transform_into(s, 0, row);
    const std::size_t off = featurizer_.action_offset();
    std::vector<double> q(num_actions());
    for (std::size_t a = 0; a < q.size(); ++a) {
      std::fill(row.begin() + static_cast<std::ptrdiff_t>(off), row.end(), 0.0);
      row[off + a] = 1.0;
      q[a] = predict_row(row);
    }
    return q;
  }

  bool operator==(const QModel&) const = default;

 private:
  Featurizer featurizer_;
  std::vector<ModelArtifact> members_;
};

inline QModel build_qmodel(std::span<const ModelArtifact> ranked, Featurizer featurizer, std::size_t k) {
  if (k < 1) throw ConfigError("ensemble size must be >= 1");
  if (ranked.empty()) throw ConfigError("cannot build a QModel from an empty ranking");
  const std::size_t take = std::min(k, ranked.size());
  return QModel(std::move(featurizer), std::vector<ModelArtifact>(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(take)));
}

inline double predict_q(const QModel& q, const Context& s, ActionId a) { return q.predict(s, a); }

/// Mean absolute error of Q against the logged rewards.
inline double mean_absolute_error(const QModel& q, const InteractionLog& log) {
  if (log.empty()) throw DataError("MAE of an empty log");
  double err = 0.0;
  for (const auto& e : log.episodes()) err += std::abs(q.predict(e.context, e.action) - e.reward.value());
  return err / static_cast<double>(log.size());
}

/// Permutation importance: mean MAE increase over `repeats` seeded shuffles of
/// each input column across the evaluation rows. One score per schema
/// column, followed by a single score for the whole action block.
inline std::vector<double> feature_importance(const QModel& q, const InteractionLog& eval, Rng& rng,
                                              std::size_t repeats = 5) {
  if (eval.empty()) throw DataError("feature importance needs a non-empty evaluation set");
  const auto& fz = q.featurizer();
  const Matrix x = fz.design_matrix(eval);
  const Vector y = rewards_of(eval);
  const auto n = static_cast<std::size_t>(x.rows());
  const auto width = static_cast<std::size_t>(x.cols());
  std::vector<double> row(width);

  auto mae_of = [&](const Matrix& m) {
    double err = 0.0;
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      for (std::size_t j = 0; j < width; ++j) row[j] = m(i, static_cast<Eigen::Index>(j));
      err += std::abs(q.predict_row(row) - y(i));
    }
    return err / static_cast<double>(n);
  };

  const double base = mae_of(x);
  const std::size_t blocks = fz.schema().size() + (fz.num_actions() > 0 ? 1 : 0);
  std::vector<double> scores(blocks, 0.0);
  std::vector<std::size_t> perm(n);
  Matrix shuffled = x;
  for (std::size_t b = 0; b < blocks; ++b) {
    const auto [off, w] = fz.block(b);
    for (std::size_t r = 0; r < repeats; ++r) {
      std::iota(perm.begin(), perm.end(), std::size_t{0});
      fisher_yates(perm, rng);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = off; j < off + w; ++j)
          shuffled(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
              x(static_cast<Eigen::Index>(perm[i]), static_cast<Eigen::Index>(j));
      scores[b] += mae_of(shuffled) - base;
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = off; j < off + w; ++j)
          shuffled(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
              x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
    scores[b] /= static_cast<double>(repeats);
  }
  return scores;
}

// ---------------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------------

inline void to_json(nlohmann::json& j, const Featurizer& f) {
  nlohmann::json cols = nlohmann::json::array();
  for (std::size_t c = 0; c < f.columns_.size(); ++c) {
    const auto& t = f.columns_[c];
    nlohmann::json jc{{"name", f.schema_.columns[c].name}, {"kind", to_string(t.kind)}};
    if (t.kind == FeatureKind::numeric) {
      jc["mean"] = t.mean;
      jc["std"] = t.stddev;
    } else {
      jc["vocab"] = t.vocab;
    }
    cols.push_back(std::move(jc));
  }
  j = nlohmann::json{{"columns", cols}, {"num_actions", f.num_actions_}};
}

inline void from_json(const nlohmann::json& j, Featurizer& f) {
  f = Featurizer{};
  std::size_t offset = 0;
  for (const auto& jc : j.at("columns")) {
    ColumnTransform t;
    const auto kind = jc.at("kind").get<std::string>();
    t.kind = kind == "numeric" ? FeatureKind::numeric : FeatureKind::categorical;
    f.schema_.columns.push_back({jc.at("name").get<std::string>(), t.kind});
    t.offset = offset;
    if (t.kind == FeatureKind::numeric) {
      t.mean = jc.at("mean").get<double>();
      t.stddev = jc.at("std").get<double>();
      t.width = 1;
    } else {
      t.vocab = jc.at("vocab").get<std::vector<std::string>>();
      t.width = t.vocab.size();
    }
    offset += t.width;
    f.columns_.push_back(std::move(t));
  }
  f.num_actions_ = j.at("num_actions").get<std::size_t>();
  f.action_offset_ = offset;
  f.width_ = offset + f.num_actions_;
}

inline void to_json(nlohmann::json& j, const ModelArtifact& m) {
  j = nlohmann::json{{"family", to_string(m.candidate.family)}, {"cv_mae", m.cv_mae}};
  switch (m.candidate.family) {
    case Family::constant: j["constant"] = m.constant; break;
    case Family::ridge:
      j["lambda"] = m.candidate.lambda;
      j["weights"] = m.weights;
      j["intercept"] = m.intercept;
      j["constant"] = m.constant;
      break;
    case Family::tree: {
      j["max_depth"] = m.candidate.max_depth;
      j["min_leaf"] = m.candidate.min_leaf;
      j["constant"] = m.constant;
      nlohmann::json nodes = nlohmann::json::array();
      for (const auto& n : m.nodes) nodes.push_back({n.feature, n.threshold, n.left, n.right, n.value});
      j["nodes"] = std::move(nodes);
      break;
    }
  }
}

inline void from_json(const nlohmann::json& j, ModelArtifact& m) {
  m = ModelArtifact{};
  const auto family = j.at("family").get<std::string>();
  m.cv_mae = j.at("cv_mae").get<double>();
  m.constant = j.at("constant").get<double>();
  if (family == "constant") {
    m.candidate = CandidateSpec::constant();
  } else if (family == "ridge") {
    m.candidate = CandidateSpec::ridge(j.at("lambda").get<double>());
    m.weights = j.at("weights").get<std::vector<double>>();
    m.intercept = j.at("intercept").get<double>();
  } else if (family == "tree") {
    m.candidate = CandidateSpec::tree(j.at("max_depth").get<std::size_t>(), j.at("min_leaf").get<std::size_t>());
    for (const auto& n : j.at("nodes"))
      m.nodes.push_back({n.at(0).get<int>(), n.at(1).get<double>(), n.at(2).get<int>(), n.at(3).get<int>(),
                         n.at(4).get<double>()});
    if (m.nodes.empty()) throw ConfigError("tree model has no nodes");
  } else {
    throw ConfigError("unknown model family '" + family + "'");
  }
}

inline void to_json(nlohmann::json& j, const QModel& q) {
  j = nlohmann::json{{"featurizer", q.featurizer()}, {"members", q.members()}};
}

inline QModel qmodel_from_json(const nlohmann::json& j) {
  try {
    return QModel(j.at("featurizer").get<Featurizer>(), j.at("members").get<std::vector<ModelArtifact>>());
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("QModel JSON: ") + e.what());
  }
}

}  // namespace autobandit
