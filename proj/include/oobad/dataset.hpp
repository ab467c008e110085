#pragma once

#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "oobad/csv.hpp"
#include "oobad/error.hpp"

namespace oobad {

/// Categorical{C} or Numerical.
class ColumnKind {
 public:
  static ColumnKind categorical(std::int32_t cardinality) {
    if (cardinality < 2)
      throw DataError("categorical cardinality must be at least 2, got " + std::to_string(cardinality));
    return ColumnKind(cardinality);
  }
  static ColumnKind numerical() { return ColumnKind(0); }

  bool is_categorical() const { return cardinality_ > 0; }
  bool is_numerical() const { return cardinality_ == 0; }
  std::int32_t cardinality() const { return cardinality_; }

  friend bool operator==(const ColumnKind&, const ColumnKind&) = default;

 private:
  explicit ColumnKind(std::int32_t c) : cardinality_(c) {}
  std::int32_t cardinality_;
};

/// One typed column. `values` is always populated (categorical codes are
/// stored there as doubles for tree splits); `codes` and `dictionary` only for
/// categorical columns.
struct Column {
  std::string name;
  ColumnKind kind = ColumnKind::numerical();
  std::vector<double> values;
  std::vector<std::int32_t> codes;
  std::vector<std::string> dictionary;

  std::size_t size() const { return values.size(); }

  static Column make_numerical(std::string name, std::vector<double> values) {
    for (std::size_t i = 0; i < values.size(); ++i)
      if (!std::isfinite(values[i]))
        throw DataError("column '" + name + "' row " + std::to_string(i) + ": non-finite value");
    Column c;
    c.name = std::move(name);
    c.kind = ColumnKind::numerical();
    c.values = std::move(values);
    return c;
  }

  static Column make_categorical(std::string name, std::vector<std::int32_t> codes,
                                 std::vector<std::string> dictionary) {
    const auto card = static_cast<std::int32_t>(dictionary.size());
    Column c;
    c.kind = ColumnKind::categorical(card);
    for (std::size_t i = 0; i < codes.size(); ++i)
      if (codes[i] < 0 || codes[i] >= card)
        throw DataError("column '" + name + "' row " + std::to_string(i) + ": code out of range");
    c.name = std::move(name);
    c.values.assign(codes.begin(), codes.end());
    c.codes = std::move(codes);
    c.dictionary = std::move(dictionary);
    return c;
  }

  /// Builds a categorical column from raw labels; dictionary in first-appearance order.
  static Column from_labels(std::string name, std::span<const std::string> labels) {
    std::unordered_map<std::string, std::int32_t> lookup;
    std::vector<std::string> dictionary;
    std::vector<std::int32_t> codes;
    codes.reserve(labels.size());
    for (const auto& label : labels) {
      auto [it, inserted] = lookup.try_emplace(label, static_cast<std::int32_t>(dictionary.size()));
      if (inserted) dictionary.push_back(label);
      codes.push_back(it->second);
    }
    return make_categorical(std::move(name), std::move(codes), std::move(dictionary));
  }
};

/// Immutable column-major table with K >= 2 equal-length columns.
class Dataset {
 public:
  explicit Dataset(std::vector<Column> columns, std::vector<std::size_t> source_rows = {})
      : columns_(std::move(columns)), source_rows_(std::move(source_rows)) {
    if (columns_.size() < 2)
      throw DataError("dataset needs at least 2 feature columns, got " + std::to_string(columns_.size()));
    n_rows_ = columns_.front().size();
    for (const auto& c : columns_)
      if (c.size() != n_rows_)
        throw DataError("column '" + c.name + "' has " + std::to_string(c.size()) + " rows, expected " +
                        std::to_string(n_rows_));
    if (n_rows_ == 0) throw DataError("dataset has no rows");
    if (source_rows_.empty()) {
      source_rows_.resize(n_rows_);
      std::iota(source_rows_.begin(), source_rows_.end(), std::size_t{0});
    } else if (source_rows_.size() != n_rows_) {
      throw DataError("source row map length does not match row count");
    }
  }

  std::size_t n_rows() const { return n_rows_; }
  std::size_t n_cols() const { return columns_.size(); }
  const Column& column(std::size_t k) const { return columns_.at(k); }
  std::span<const Column> columns() const { return columns_; }

  /// Index of each row in the original input (differs after row dropping or filtering).
  std::span<const std::size_t> source_rows() const { return source_rows_; }

  std::vector<std::string> column_names() const {
    std::vector<std::string> names;
    for (const auto& c : columns_) names.push_back(c.name);
    return names;
  }

  /// Subset of rows, in the given order. Dictionaries are kept whole so codes
  /// stay comparable with the parent dataset.
  Dataset select_rows(std::span<const std::size_t> rows) const {
    std::vector<Column> out;
    out.reserve(columns_.size());
    for (const auto& c : columns_) {
      Column s;
      s.name = c.name;
      s.kind = c.kind;
      s.dictionary = c.dictionary;
      s.values.reserve(rows.size());
      for (auto r : rows) s.values.push_back(c.values.at(r));
      if (c.kind.is_categorical()) {
        s.codes.reserve(rows.size());
        for (auto r : rows) s.codes.push_back(c.codes[r]);
      }
      out.push_back(std::move(s));
    }
    std::vector<std::size_t> src;
    src.reserve(rows.size());
    for (auto r : rows) src.push_back(source_rows_[r]);
    return Dataset(std::move(out), std::move(src));
  }

 private:
  std::vector<Column> columns_;
  std::vector<std::size_t> source_rows_;
  std::size_t n_rows_ = 0;
};

enum class KindOverride { categorical, numerical };
enum class MissingValuePolicy { reject, drop_rows };

struct SchemaConfig {
  double categorical_ratio_threshold = 0.05;
  std::map<std::string, KindOverride> overrides;
  MissingValuePolicy missing_value_policy = MissingValuePolicy::reject;
  /// Columns read from the file but not turned into features (e.g. labels).
  std::vector<std::string> exclude;

  void validate() const {
    if (!(categorical_ratio_threshold > 0.0 && categorical_ratio_threshold <= 1.0))
      throw ConfigError("categorical ratio threshold must be in (0, 1], got " +
                        std::to_string(categorical_ratio_threshold));
  }
};

/// What the raw cells of a column look like.
enum class ValueShape { non_numeric, integer, real };

/// Strings are always categorical. Numeric columns are categorical only when
/// integer-valued with distinct_count < threshold * n_rows (strict).
inline ColumnKind infer_column_kind(std::size_t distinct_count, std::size_t n_rows, double threshold,
                                    ValueShape shape) {
  if (!(threshold > 0.0 && threshold <= 1.0)) throw ConfigError("threshold must be in (0, 1]");
  if (distinct_count == 0 || n_rows == 0 || distinct_count > n_rows)
    throw ConfigError("distinct count must be in [1, n_rows]");
  if (distinct_count == 1) throw DataError("constant column");
  const auto card = static_cast<std::int32_t>(distinct_count);
  if (shape == ValueShape::non_numeric) return ColumnKind::categorical(card);
  if (shape == ValueShape::integer &&
      static_cast<double>(distinct_count) < threshold * static_cast<double>(n_rows))
    return ColumnKind::categorical(card);
  return ColumnKind::numerical();
}

/// Parses a decimal real; the whole (trimmed) cell must be consumed and finite.
inline bool parse_real(std::string_view cell, double& out) {
  cell = detail::trim(cell);
  if (cell.empty()) return false;
  if (cell.front() == '+') cell.remove_prefix(1);
  const auto* end = cell.data() + cell.size();
  auto [ptr, ec] = std::from_chars(cell.data(), end, out);
  return ec == std::errc{} && ptr == end && std::isfinite(out);
}

inline bool is_missing(std::string_view cell) { return detail::trim(cell).empty(); }

/// Turns a raw table into a typed Dataset following `schema`.
inline Dataset build_dataset(const CsvTable& table, const SchemaConfig& schema) {
  schema.validate();
  for (const auto& [name, kind] : schema.overrides) (void)table.column_index(name);
  std::vector<std::size_t> feature_cols;
  for (std::size_t c = 0; c < table.n_cols(); ++c) {
    bool excluded = false;
    for (const auto& e : schema.exclude) excluded = excluded || table.header[c] == e;
    if (!excluded) feature_cols.push_back(c);
  }
  for (const auto& e : schema.exclude) (void)table.column_index(e);

  std::vector<std::size_t> keep;
  for (std::size_t r = 0; r < table.n_rows(); ++r) {
    bool complete = true;
    for (auto c : feature_cols) {
      if (!is_missing(table.rows[r][c])) continue;
      if (schema.missing_value_policy == MissingValuePolicy::reject)
        throw DataError("missing value at row " + std::to_string(r) + ", column '" + table.header[c] + "'");
      complete = false;
      break;
    }
    if (complete) keep.push_back(r);
  }
  if (keep.empty()) throw DataError("no complete rows in input");

  std::vector<Column> columns;
  for (auto c : feature_cols) {
    const std::string& name = table.header[c];
    std::vector<std::string> cells;
    cells.reserve(keep.size());
    for (auto r : keep) cells.push_back(table.rows[r][c]);

    ValueShape shape = ValueShape::integer;
    std::vector<double> parsed(cells.size());
    std::size_t first_bad = cells.size();
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (!parse_real(cells[i], parsed[i])) {
        shape = ValueShape::non_numeric;
        first_bad = i;
        break;
      }
      if (shape == ValueShape::integer && parsed[i] != std::floor(parsed[i])) shape = ValueShape::real;
    }

    const auto ov = schema.overrides.find(name);
    if (ov != schema.overrides.end() && ov->second == KindOverride::numerical) {
      if (shape == ValueShape::non_numeric)
        throw DataError("unparseable numerical cell '" + cells[first_bad] + "' at row " +
                        std::to_string(keep[first_bad]) + ", column '" + name + "'");
      columns.push_back(Column::make_numerical(name, std::move(parsed)));
      continue;
    }
    if (ov != schema.overrides.end()) {
      auto col = Column::from_labels(name, cells);
      columns.push_back(std::move(col));
      continue;
    }

    std::size_t distinct = 0;
    if (shape == ValueShape::non_numeric) {
      std::unordered_map<std::string_view, char> seen;
      for (const auto& s : cells) seen.emplace(s, 0);
      distinct = seen.size();
    } else {
      std::unordered_map<double, char> seen;
      for (double v : parsed) seen.emplace(v, 0);
      distinct = seen.size();
    }
    ColumnKind kind = ColumnKind::numerical();
    try {
      kind = infer_column_kind(distinct, cells.size(), schema.categorical_ratio_threshold, shape);
    } catch (const DataError& e) {
      throw DataError(std::string(e.what()) + " '" + name + "': drop it or override its kind");
    }
    if (kind.is_categorical())
      columns.push_back(Column::from_labels(name, cells));
    else
      columns.push_back(Column::make_numerical(name, std::move(parsed)));
  }
  return Dataset(std::move(columns), std::move(keep));
}

inline Dataset load_csv(const std::string& path, const SchemaConfig& schema) {
  return build_dataset(read_csv(path), schema);
}

/// Target column k and the remaining columns in original order. Returns
/// pointers into the dataset; nothing is copied.
struct FeatureSplit {
  const Column* target;
  std::vector<const Column*> predictors;
};

inline FeatureSplit split_features(const Dataset& dataset, std::size_t k) {
  if (k >= dataset.n_cols())
    throw std::out_of_range("feature index " + std::to_string(k) + " out of range for " +
                            std::to_string(dataset.n_cols()) + " columns");
  FeatureSplit split{&dataset.column(k), {}};
  split.predictors.reserve(dataset.n_cols() - 1);
  for (std::size_t j = 0; j < dataset.n_cols(); ++j)
    if (j != k) split.predictors.push_back(&dataset.column(j));
  return split;
}

}  // namespace oobad
