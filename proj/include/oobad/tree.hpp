#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "oobad/random.hpp"

namespace oobad {

/// Classification over n_classes codes, or regression when n_classes == 0.
struct Task {
  std::int32_t n_classes = 0;

  static Task regression() { return {0}; }
  static Task classification(std::int32_t classes) { return {classes}; }
  bool is_classification() const { return n_classes > 0; }
  friend bool operator==(const Task&, const Task&) = default;
};

/// Internal nodes route left iff value <= threshold. Leaves carry the
/// regression mean, or the majority class plus class counts.
struct TreeNode {
  std::int32_t feature = -1;
  double threshold = 0.0;
  std::int32_t left = -1;
  std::int32_t right = -1;
  double value = 0.0;
  std::uint32_t n_samples = 0;
  std::uint32_t counts_offset = 0;

  bool is_leaf() const { return feature < 0; }
};

/// Index of the largest count, lowest index on ties.
inline std::int32_t majority_class(std::span<const std::uint32_t> counts) {
  std::int32_t best = 0;
  for (std::size_t c = 1; c < counts.size(); ++c)
    if (counts[c] > counts[static_cast<std::size_t>(best)]) best = static_cast<std::int32_t>(c);
  return best;
}

class Tree {
 public:
  Tree() = default;
  explicit Tree(Task task) : task_(task) {}

  Task task() const { return task_; }
  std::span<const TreeNode> nodes() const { return nodes_; }
  const TreeNode& node(std::size_t i) const { return nodes_.at(i); }
  std::size_t size() const { return nodes_.size(); }

  std::span<const std::uint32_t> leaf_counts(const TreeNode& leaf) const {
    if (!task_.is_classification()) return {};
    return std::span<const std::uint32_t>(class_counts_).subspan(leaf.counts_offset,
                                                                 static_cast<std::size_t>(task_.n_classes));
  }

  std::int32_t add_regression_leaf(double mean, std::uint32_t n_samples) {
    TreeNode n;
    n.value = mean;
    n.n_samples = n_samples;
    nodes_.push_back(n);
    return static_cast<std::int32_t>(nodes_.size() - 1);
  }

  std::int32_t add_classification_leaf(std::span<const std::uint32_t> counts) {
    if (counts.size() != static_cast<std::size_t>(task_.n_classes))
      throw std::invalid_argument("leaf class counts do not match task cardinality");
    TreeNode n;
    n.counts_offset = static_cast<std::uint32_t>(class_counts_.size());
    class_counts_.insert(class_counts_.end(), counts.begin(), counts.end());
    std::uint64_t total = 0;
    for (auto c : counts) total += c;
    n.n_samples = static_cast<std::uint32_t>(total);
    n.value = majority_class(counts);
    nodes_.push_back(n);
    return static_cast<std::int32_t>(nodes_.size() - 1);
  }

  /// Adds an internal node; children are attached later with set_children.
  std::int32_t add_internal(std::int32_t feature, double threshold, std::uint32_t n_samples) {
    TreeNode n;
    n.feature = feature;
    n.threshold = threshold;
    n.n_samples = n_samples;
    nodes_.push_back(n);
    return static_cast<std::int32_t>(nodes_.size() - 1);
  }

  void set_children(std::int32_t node, std::int32_t left, std::int32_t right) {
    nodes_.at(static_cast<std::size_t>(node)).left = left;
    nodes_.at(static_cast<std::size_t>(node)).right = right;
  }

  void set_child(std::int32_t node, bool is_left, std::int32_t child) {
    auto& n = nodes_.at(static_cast<std::size_t>(node));
    (is_left ? n.left : n.right) = child;
  }

  /// Routes a row given by an accessor value(feature) -> double. Returns the leaf.
  template <class ValueOf>
  const TreeNode& route(ValueOf&& value_of) const {
    std::size_t i = 0;
    while (!nodes_[i].is_leaf()) {
      const auto& n = nodes_[i];
      i = static_cast<std::size_t>(value_of(n.feature) <= n.threshold ? n.left : n.right);
    }
    return nodes_[i];
  }

  // Raw storage access for serialization.
  std::span<const std::uint32_t> all_class_counts() const { return class_counts_; }
  void assign_raw(std::vector<TreeNode> nodes, std::vector<std::uint32_t> counts) {
    nodes_ = std::move(nodes);
    class_counts_ = std::move(counts);
  }

 private:
  Task task_;
  std::vector<TreeNode> nodes_;
  std::vector<std::uint32_t> class_counts_;
};

/// Prediction for a full predictor row: majority class code (as double) or leaf mean.
inline double predict_tree(const Tree& tree, std::span<const double> row) {
  return tree.route([&](std::int32_t f) { return row[static_cast<std::size_t>(f)]; }).value;
}

/// Column-major predictor matrix: one span of length N per predictor.
using PredictorView = std::vector<std::span<const double>>;

inline double predict_tree(const Tree& tree, const PredictorView& predictors, std::size_t row) {
  return tree.route([&](std::int32_t f) { return predictors[static_cast<std::size_t>(f)][row]; }).value;
}

struct TreeParams {
  std::size_t min_leaf = 1;
  std::size_t mtry = 1;
};

namespace detail {

// Grows one CART tree. Scratch buffers are reused across nodes.
class TreeGrower {
 public:
  TreeGrower(const PredictorView& x, std::span<const double> y, Task task, TreeParams params, Rng& rng)
      : x_(x), y_(y), task_(task), params_(params), rng_(rng), tree_(task) {
    const auto classes = static_cast<std::size_t>(std::max(task.n_classes, 0));
    counts_.resize(classes);
    left_counts_.resize(classes);
    features_.resize(x.size());
  }

  Tree grow(std::vector<std::uint32_t> samples) {
    samples_ = std::move(samples);
    sorted_.resize(samples_.size());
    struct Pending {
      std::size_t begin, end;
      std::int32_t parent;
      bool is_left;
    };
    std::vector<Pending> stack{{0, samples_.size(), -1, false}};
    while (!stack.empty()) {
      const Pending p = stack.back();
      stack.pop_back();
      const auto [id, mid] = build_node(p.begin, p.end);
      if (p.parent >= 0) tree_.set_child(p.parent, p.is_left, id);
      if (mid != 0) {
        // right pushed first so the left subtree is built (and numbered) first
        stack.push_back({mid, p.end, id, false});
        stack.push_back({p.begin, mid, id, true});
      }
    }
    return std::move(tree_);
  }

 private:
  struct Split {
    double gain = 0.0;
    std::int32_t feature = -1;
    double threshold = 0.0;
  };

  // Returns (node id, partition point); partition point 0 means leaf.
  std::pair<std::int32_t, std::size_t> build_node(std::size_t begin, std::size_t end) {
    const std::size_t n = end - begin;
    bool pure = true;
    if (task_.is_classification()) {
      std::fill(counts_.begin(), counts_.end(), 0u);
      for (std::size_t i = begin; i < end; ++i) ++counts_[label(samples_[i])];
      std::size_t nonzero = 0;
      for (auto c : counts_) nonzero += c > 0;
      pure = nonzero <= 1;
    } else {
      const double first = y_[samples_[begin]];
      for (std::size_t i = begin + 1; i < end && pure; ++i) pure = y_[samples_[i]] == first;
    }

    if (!pure && n >= 2 * params_.min_leaf) {
      const Split split = find_split(begin, end);
      if (split.feature >= 0) {
        const auto col = x_[static_cast<std::size_t>(split.feature)];
        const auto it = std::stable_partition(samples_.begin() + static_cast<std::ptrdiff_t>(begin),
                                              samples_.begin() + static_cast<std::ptrdiff_t>(end),
                                              [&](std::uint32_t s) { return col[s] <= split.threshold; });
        const auto mid = static_cast<std::size_t>(it - samples_.begin());
        const auto id = tree_.add_internal(split.feature, split.threshold, static_cast<std::uint32_t>(n));
        return {id, mid};
      }
    }
    return {make_leaf(begin, end), 0};
  }

  std::int32_t make_leaf(std::size_t begin, std::size_t end) {
    const auto n = static_cast<std::uint32_t>(end - begin);
    if (task_.is_classification()) return tree_.add_classification_leaf(counts_);
    double sum = 0.0;
    for (std::size_t i = begin; i < end; ++i) sum += y_[samples_[i]];
    return tree_.add_regression_leaf(sum / static_cast<double>(n), n);
  }

  std::size_t label(std::uint32_t s) const { return static_cast<std::size_t>(y_[s]); }

  Split find_split(std::size_t begin, std::size_t end) {
    const std::size_t n = end - begin;
    const std::size_t p = x_.size();
    const std::size_t m = std::min(params_.mtry, p);
    // partial Fisher-Yates over feature indices, then ascending order for tie-breaks
    for (std::size_t f = 0; f < p; ++f) features_[f] = static_cast<std::int32_t>(f);
    for (std::size_t j = 0; j < m; ++j) {
      const auto r = j + static_cast<std::size_t>(uniform_below(rng_, p - j));
      std::swap(features_[j], features_[r]);
    }
    std::sort(features_.begin(), features_.begin() + static_cast<std::ptrdiff_t>(m));

    double total_sum = 0.0;
    std::int64_t total_sq = 0;
    if (task_.is_classification()) {
      for (auto c : counts_) total_sq += static_cast<std::int64_t>(c) * c;
    } else {
      for (std::size_t i = begin; i < end; ++i) total_sum += y_[samples_[i]];
    }
    const double dn = static_cast<double>(n);
    const double parent_term = static_cast<double>(total_sq) / dn;
    const std::size_t min_leaf = params_.min_leaf;

    Split best;
    for (std::size_t j = 0; j < m; ++j) {
      const auto f = features_[j];
      const auto col = x_[static_cast<std::size_t>(f)];
      for (std::size_t i = begin; i < end; ++i) sorted_[i - begin] = {col[samples_[i]], samples_[i]};
      std::sort(sorted_.begin(), sorted_.begin() + static_cast<std::ptrdiff_t>(n));
      if (sorted_[0].first == sorted_[n - 1].first) continue;

      if (task_.is_classification()) {
        std::fill(left_counts_.begin(), left_counts_.end(), 0u);
        std::int64_t sq_left = 0;
        std::int64_t sq_right = total_sq;
        for (std::size_t i = 0; i + 1 < n; ++i) {
          const std::size_t c = label(sorted_[i].second);
          const std::int64_t cl = left_counts_[c];
          const std::int64_t cr = static_cast<std::int64_t>(counts_[c]) - cl;
          sq_left += 2 * cl + 1;
          sq_right -= 2 * cr - 1;
          ++left_counts_[c];
          const std::size_t n_left = i + 1;
          if (n_left < min_leaf || n - n_left < min_leaf) continue;
          if (sorted_[i].first == sorted_[i + 1].first) continue;
          const double gain = static_cast<double>(sq_left) / static_cast<double>(n_left) +
                              static_cast<double>(sq_right) / static_cast<double>(n - n_left) - parent_term;
          consider(best, gain, f, sorted_[i].first, sorted_[i + 1].first, 1e-10);
        }
      } else {
        double sum_left = 0.0;
        for (std::size_t i = 0; i + 1 < n; ++i) {
          sum_left += y_[sorted_[i].second];
          const std::size_t n_left = i + 1;
          if (n_left < min_leaf || n - n_left < min_leaf) continue;
          if (sorted_[i].first == sorted_[i + 1].first) continue;
          const double nl = static_cast<double>(n_left);
          const double nr = static_cast<double>(n - n_left);
          const double diff = sum_left / nl - (total_sum - sum_left) / nr;
          const double gain = nl * nr / dn * diff * diff;
          consider(best, gain, f, sorted_[i].first, sorted_[i + 1].first, 0.0);
        }
      }
    }
    return best;
  }

  static void consider(Split& best, double gain, std::int32_t feature, double lo, double hi, double eps) {
    if (!(gain > eps) || !(gain > best.gain)) return;
    double mid = lo + (hi - lo) / 2.0;
    if (!(mid < hi)) mid = lo;
    best = {gain, feature, mid};
  }

  const PredictorView& x_;
  std::span<const double> y_;
  Task task_;
  TreeParams params_;
  Rng& rng_;
  Tree tree_;
  std::vector<std::uint32_t> samples_;
  std::vector<std::pair<double, std::uint32_t>> sorted_;
  std::vector<std::uint32_t> counts_;
  std::vector<std::uint32_t> left_counts_;
  std::vector<std::int32_t> features_;
};

}  // namespace detail

/// Fits a CART tree on the given training rows (duplicates allowed). For
/// classification, `target` holds class codes in [0, n_classes).
inline Tree fit_tree(const PredictorView& predictors, std::span<const double> target, Task task,
                     std::vector<std::uint32_t> samples, TreeParams params, Rng& rng) {
  if (samples.empty()) throw std::invalid_argument("fit_tree: no training rows");
  if (predictors.empty()) throw std::invalid_argument("fit_tree: no predictors");
  detail::TreeGrower grower(predictors, target, task, params, rng);
  return grower.grow(std::move(samples));
}

}  // namespace oobad
