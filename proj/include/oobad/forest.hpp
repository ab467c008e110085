#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "oobad/dataset.hpp"
#include "oobad/error.hpp"
#include "oobad/parallel.hpp"
#include "oobad/random.hpp"
#include "oobad/tree.hpp"

namespace oobad {

/// Candidate predictors per split: floor(sqrt(P)) (min 1), all P, or a fixed m.
class MtryRule {
 public:
  enum class Kind { sqrt, all, fixed };

  static MtryRule sqrt() { return MtryRule(Kind::sqrt, 0); }
  static MtryRule all() { return MtryRule(Kind::all, 0); }
  static MtryRule fixed(std::size_t m) { return MtryRule(Kind::fixed, m); }

  Kind kind() const { return kind_; }
  std::size_t m() const { return m_; }

  std::size_t resolve(std::size_t n_predictors) const {
    switch (kind_) {
      case Kind::all:
        return n_predictors;
      case Kind::fixed:
        return m_;
      case Kind::sqrt:
        break;
    }
    auto r = static_cast<std::size_t>(std::sqrt(static_cast<double>(n_predictors)));
    while (r * r > n_predictors) --r;
    while ((r + 1) * (r + 1) <= n_predictors) ++r;
    return std::max<std::size_t>(r, 1);
  }

  std::string to_string() const {
    switch (kind_) {
      case Kind::sqrt:
        return "sqrt";
      case Kind::all:
        return "all";
      case Kind::fixed:
        break;
    }
    return std::to_string(m_);
  }

  /// "sqrt", "all", or a positive integer.
  static MtryRule parse(const std::string& text) {
    if (text == "sqrt") return sqrt();
    if (text == "all") return all();
    std::size_t used = 0;
    unsigned long long m = 0;
    try {
      m = std::stoull(text, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != text.size() || m == 0) throw ConfigError("mtry must be 'sqrt', 'all' or a positive integer, got '" + text + "'");
    return fixed(static_cast<std::size_t>(m));
  }

  friend bool operator==(const MtryRule&, const MtryRule&) = default;

 private:
  MtryRule(Kind k, std::size_t m) : kind_(k), m_(m) {}
  Kind kind_;
  std::size_t m_;
};

struct ForestConfig {
  std::size_t n_trees = 500;
  double min_leaf_fraction = 0.04;
  MtryRule mtry = MtryRule::sqrt();
  std::uint64_t seed = 0;

  void validate(std::size_t n_predictors) const {
    if (n_trees < 1) throw ConfigError("n_trees must be at least 1");
    if (!(min_leaf_fraction > 0.0 && min_leaf_fraction <= 1.0))
      throw ConfigError("min_leaf_fraction must be in (0, 1], got " + std::to_string(min_leaf_fraction));
    if (mtry.kind() == MtryRule::Kind::fixed && (mtry.m() < 1 || mtry.m() > n_predictors))
      throw ConfigError("fixed mtry " + std::to_string(mtry.m()) + " outside [1, " + std::to_string(n_predictors) +
                        "]");
  }

  /// ceil(min_leaf_fraction * n), at least 1.
  std::size_t min_leaf_size(std::size_t n) const {
    // tolerance keeps e.g. 0.04 * 250 from rounding up to 11
    const double raw = min_leaf_fraction * static_cast<double>(n);
    const auto size = static_cast<std::size_t>(std::ceil(raw - 1e-9 * std::max(1.0, raw)));
    return std::max<std::size_t>(size, 1);
  }
};

/// Draws n indices uniformly with replacement; returns per-index counts.
inline std::vector<std::uint32_t> bootstrap_sample(std::size_t n, Rng& rng) {
  std::vector<std::uint32_t> counts(n, 0);
  for (std::size_t d = 0; d < n; ++d) ++counts[uniform_below(rng, n)];
  return counts;
}

/// T fitted trees plus the T x N in-bag count matrix (row-major by tree).
class Forest {
 public:
  Forest() = default;
  Forest(Task task, std::size_t n_rows, std::vector<Tree> trees, std::vector<std::uint32_t> in_bag)
      : task_(task), n_rows_(n_rows), trees_(std::move(trees)), in_bag_(std::move(in_bag)) {
    if (in_bag_.size() != trees_.size() * n_rows_) throw std::invalid_argument("in-bag matrix shape mismatch");
  }

  Task task() const { return task_; }
  std::size_t n_trees() const { return trees_.size(); }
  std::size_t n_rows() const { return n_rows_; }
  std::span<const Tree> trees() const { return trees_; }
  const Tree& tree(std::size_t t) const { return trees_.at(t); }

  std::span<const std::uint32_t> in_bag_counts(std::size_t t) const {
    return std::span<const std::uint32_t>(in_bag_).subspan(t * n_rows_, n_rows_);
  }
  std::uint32_t in_bag_count(std::size_t t, std::size_t i) const { return in_bag_[t * n_rows_ + i]; }
  bool is_oob(std::size_t t, std::size_t i) const { return in_bag_count(t, i) == 0; }

  std::span<const std::uint32_t> in_bag_matrix() const { return in_bag_; }

 private:
  Task task_;
  std::size_t n_rows_ = 0;
  std::vector<Tree> trees_;
  std::vector<std::uint32_t> in_bag_;
};

inline PredictorView make_predictor_view(std::span<const Column* const> predictors) {
  PredictorView view;
  view.reserve(predictors.size());
  for (const Column* c : predictors) view.emplace_back(c->values);
  return view;
}

inline Task task_for(const Column& target) {
  return target.kind.is_categorical() ? Task::classification(target.kind.cardinality()) : Task::regression();
}

/// Fits a bagged CART ensemble predicting `target` from `predictors`. Tree t
/// draws its bootstrap sample and split candidates from a stream seeded by
/// (config.seed, t), so the result does not depend on `threads`.
inline Forest fit_forest(std::span<const Column* const> predictors, const Column& target,
                         const ForestConfig& config, unsigned threads = 0) {
  if (predictors.empty()) throw ConfigError("fit_forest needs at least one predictor");
  config.validate(predictors.size());
  const std::size_t n = target.size();
  for (const Column* c : predictors)
    if (c->size() != n) throw DataError("predictor '" + c->name + "' length differs from target");
  const std::size_t min_leaf = config.min_leaf_size(n);
  if (n < min_leaf) throw ConfigError("dataset smaller than the minimum leaf size");

  const Task task = task_for(target);
  const PredictorView view = make_predictor_view(predictors);
  const TreeParams params{min_leaf, config.mtry.resolve(predictors.size())};

  std::vector<Tree> trees(config.n_trees);
  std::vector<std::uint32_t> in_bag(config.n_trees * n);
  parallel_for(config.n_trees, threads, [&](std::size_t t) {
    Rng rng(derive_seed(config.seed, t));
    auto counts = bootstrap_sample(n, rng);
    std::vector<std::uint32_t> samples;
    samples.reserve(n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::uint32_t c = 0; c < counts[i]; ++c) samples.push_back(static_cast<std::uint32_t>(i));
    std::copy(counts.begin(), counts.end(), in_bag.begin() + static_cast<std::ptrdiff_t>(t * n));
    trees[t] = fit_tree(view, target.values, task, std::move(samples), params, rng);
  });
  return Forest(task, n, std::move(trees), std::move(in_bag));
}

/// Per-row out-of-bag predictions in CSR layout: row i owns
/// [offsets[i], offsets[i+1]) in tree-index order. Classification predictions
/// are class codes; regression predictions are leaf means.
class OobPredictionSet {
 public:
  OobPredictionSet(Task task, std::vector<std::size_t> offsets, std::vector<double> values)
      : task_(task), offsets_(std::move(offsets)), values_(std::move(values)) {}

  Task task() const { return task_; }
  std::size_t n_rows() const { return offsets_.size() - 1; }
  std::size_t count(std::size_t i) const { return offsets_[i + 1] - offsets_[i]; }
  std::span<const double> row(std::size_t i) const {
    return std::span<const double>(values_).subspan(offsets_[i], count(i));
  }
  /// Class labels for row i (classification only).
  std::vector<std::int32_t> labels(std::size_t i) const {
    std::vector<std::int32_t> out;
    for (double v : row(i)) out.push_back(static_cast<std::int32_t>(v));
    return out;
  }

 private:
  Task task_;
  std::vector<std::size_t> offsets_;
  std::vector<double> values_;
};

/// Collects, for every row, the predictions of exactly those trees whose
/// bootstrap sample did not contain it.
inline OobPredictionSet oob_predictions(const Forest& forest, std::span<const Column* const> predictors,
                                        unsigned threads = 0) {
  const std::size_t n = forest.n_rows();
  const std::size_t t_count = forest.n_trees();
  for (const Column* c : predictors)
    if (c->size() != n) throw DataError("predictor '" + c->name + "' is not row-aligned with the forest");
  const PredictorView view = make_predictor_view(predictors);

  std::vector<std::vector<double>> per_tree(t_count);
  parallel_for(t_count, threads, [&](std::size_t t) {
    const auto bag = forest.in_bag_counts(t);
    auto& out = per_tree[t];
    for (std::size_t i = 0; i < n; ++i)
      if (bag[i] == 0) out.push_back(predict_tree(forest.tree(t), view, i));
  });

  std::vector<std::size_t> offsets(n + 1, 0);
  for (std::size_t t = 0; t < t_count; ++t) {
    const auto bag = forest.in_bag_counts(t);
    for (std::size_t i = 0; i < n; ++i) offsets[i + 1] += bag[i] == 0;
  }
  for (std::size_t i = 0; i < n; ++i) offsets[i + 1] += offsets[i];

  std::vector<double> values(offsets[n]);
  std::vector<std::size_t> cursor(offsets.begin(), offsets.end() - 1);
  for (std::size_t t = 0; t < t_count; ++t) {
    const auto bag = forest.in_bag_counts(t);
    std::size_t k = 0;
    for (std::size_t i = 0; i < n; ++i)
      if (bag[i] == 0) values[cursor[i]++] = per_tree[t][k++];
  }
  return OobPredictionSet(forest.task(), std::move(offsets), std::move(values));
}

}  // namespace oobad
