#pragma once

// Supervised classification datasets replayed as bandit problems: actions
// are class indices and the reward is 1 iff the chosen class is the hidden
// label.

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "core.hpp"
#include "csv.hpp"
#include "errors.hpp"
#include "rng.hpp"

namespace autobandit {

struct DatasetSchema {
  FeatureSchema features;
  std::string label_column;
  std::vector<std::string> classes;

  std::size_t num_classes() const { return classes.size(); }
  bool operator==(const DatasetSchema&) const = default;

  void validate() const {
    if (classes.size() < 2) throw SchemaError("dataset schema needs at least 2 classes");
    for (const auto& c : features.columns)
      if (c.name == label_column) throw SchemaError("label column '" + label_column + "' listed as a feature");
    std::vector<std::string> sorted = classes;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
      throw SchemaError("duplicate class token in schema");
  }
};

inline void to_json(nlohmann::json& j, const DatasetSchema& s) {
  nlohmann::json cols = nlohmann::json::array();
  for (const auto& c : s.features.columns) cols.push_back({{"name", c.name}, {"kind", to_string(c.kind)}});
  j = nlohmann::json{{"columns", cols}, {"label_column", s.label_column}, {"classes", s.classes}};
}

inline void from_json(const nlohmann::json& j, DatasetSchema& s) {
  try {
    s.features.columns.clear();
    for (const auto& c : j.at("columns")) {
      const auto kind = c.at("kind").get<std::string>();
      if (kind != "numeric" && kind != "categorical") throw SchemaError("unknown column kind '" + kind + "'");
      s.features.columns.push_back(
          {c.at("name").get<std::string>(), kind == "numeric" ? FeatureKind::numeric : FeatureKind::categorical});
    }
    j.at("label_column").get_to(s.label_column);
    j.at("classes").get_to(s.classes);
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("dataset schema JSON: ") + e.what());
  }
  s.validate();
}

inline DatasetSchema load_schema(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open schema '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError("schema '" + path + "' is not valid JSON: " + e.what());
  }
  return j.get<DatasetSchema>();
}

struct LabeledRow {
  Context context;
  std::size_t label = 0;
  bool operator==(const LabeledRow&) const = default;
};

struct SupervisedDataset {
  DatasetSchema schema;
  std::vector<LabeledRow> rows;
  std::size_t dropped_rows = 0;  // rows with missing values skipped at load

  std::size_t size() const { return rows.size(); }
};

namespace detail {
inline bool is_missing(const std::string& cell) {
  auto first = cell.find_first_not_of(" \t");
  if (first == std::string::npos) return true;
  auto last = cell.find_last_not_of(" \t");
  return cell.substr(first, last - first + 1) == "?";
}
}  // namespace detail

/// Typed rows from a CSV table with a header. Rows with an empty or "?"
/// cell are dropped and counted.
inline SupervisedDataset parse_dataset(const csv::Table& table, const DatasetSchema& schema) {
  schema.validate();
  std::map<std::string, std::size_t> where;
  for (std::size_t i = 0; i < table.header.size(); ++i) where[table.header[i]] = i;
  if (where.size() != table.header.size()) throw SchemaError("duplicate column in CSV header");
  if (table.header.size() != schema.features.size() + 1)
    throw SchemaError("CSV has " + std::to_string(table.header.size()) + " columns, schema declares " +
                      std::to_string(schema.features.size() + 1));
  std::vector<std::size_t> feature_pos;
  for (const auto& c : schema.features.columns) {
    auto it = where.find(c.name);
    if (it == where.end()) throw SchemaError("CSV header lacks column '" + c.name + "'");
    feature_pos.push_back(it->second);
  }
  auto label_it = where.find(schema.label_column);
  if (label_it == where.end()) throw SchemaError("CSV header lacks label column '" + schema.label_column + "'");
  const std::size_t label_pos = label_it->second;

  std::map<std::string, std::size_t> class_index;
  for (std::size_t k = 0; k < schema.classes.size(); ++k) class_index[schema.classes[k]] = k;

  SupervisedDataset ds;
  ds.schema = schema;
  std::size_t row = 0;
  for (const auto& rec : table.rows) {
    ++row;
    if (rec.size() != table.header.size())
      throw ParseError(row, "*", "expected " + std::to_string(table.header.size()) + " fields, got " +
                                     std::to_string(rec.size()));
    bool missing = detail::is_missing(rec[label_pos]);
    for (std::size_t p : feature_pos) missing = missing || detail::is_missing(rec[p]);
    if (missing) {
      ++ds.dropped_rows;
      continue;
    }
    LabeledRow lr;
    lr.context.values.reserve(feature_pos.size());
    for (std::size_t i = 0; i < feature_pos.size(); ++i) {
      const auto& cell = rec[feature_pos[i]];
      if (schema.features.columns[i].kind == FeatureKind::numeric) {
        auto v = csv::parse_number(cell);
        if (!v) throw ParseError(row, schema.features.columns[i].name, "not a number: '" + cell + "'");
        lr.context.values.emplace_back(*v);
      } else {
        lr.context.values.emplace_back(cell);
      }
    }
    auto cls = class_index.find(rec[label_pos]);
    if (cls == class_index.end()) throw SchemaError("row " + std::to_string(row) + ": unknown class '" + rec[label_pos] + "'");
    lr.label = cls->second;
    ds.rows.push_back(std::move(lr));
  }
  return ds;
}

inline SupervisedDataset load_csv(const std::string& path, const DatasetSchema& schema) {
  return parse_dataset(csv::read_file(path), schema);
}

/// A shuffled replay order over a dataset's rows.
struct BanditStream {
  std::vector<LabeledRow> rows;
  std::uint64_t shuffle_seed = 0;

  std::size_t size() const { return rows.size(); }
};

inline BanditStream to_bandit(const SupervisedDataset& ds, std::uint64_t shuffle_seed) {
  if (ds.rows.empty()) throw ConfigError("cannot build a bandit stream from an empty dataset");
  BanditStream s{ds.rows, shuffle_seed};
  Rng rng(shuffle_seed);
  fisher_yates(s.rows, rng);
  return s;
}

inline Reward pull_label(std::size_t hidden_label, ActionId a) {
  return Reward(a.index == hidden_label ? 1.0 : 0.0);
}

}  // namespace autobandit
