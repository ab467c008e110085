#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <ostream>
#include <vector>

#include "oobad/forest.hpp"
#include "oobad/scoring.hpp"
#include "oobad/synthetic.hpp"

namespace oobad {

struct BenchConfig {
  std::vector<std::size_t> sizes{1000, 2000, 4000, 8000};
  std::size_t n_features = 5;
  std::size_t n_trees = 100;
  double min_leaf_fraction = 0.04;
  std::uint64_t seed = 0;
  /// Each point is the minimum over this many timed runs.
  std::size_t repeats = 3;
  /// Also time T and 2T at the smallest size.
  bool tree_doubling = true;
  unsigned threads = 0;
};

struct BenchPoint {
  std::size_t n_rows = 0;
  double seconds = 0.0;
};

struct BenchResult {
  std::vector<BenchPoint> points;
  /// t(2N) / t(N) for consecutive sizes.
  std::vector<double> doubling_factors;
  /// Geometric mean of the doubling factors.
  double mean_doubling_factor = 0.0;
  /// Least-squares slope of log t against log(N log N); 1 means N log N growth.
  double nlogn_exponent = 0.0;
  /// t(2T) / t(T) at the smallest size, when measured.
  double tree_doubling_factor = 0.0;
};

namespace detail {

inline double time_scoring(const Dataset& data, const ForestConfig& config, std::size_t repeats, unsigned threads) {
  double best = 0.0;
  for (std::size_t r = 0; r < std::max<std::size_t>(repeats, 1); ++r) {
    const auto start = std::chrono::steady_clock::now();
    const auto report = score_dataset(data, config, threads);
    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
    if (report.n_rows() != data.n_rows()) throw std::logic_error("bench: report size mismatch");
    if (r == 0 || elapsed.count() < best) best = elapsed.count();
  }
  return best;
}

}  // namespace detail

/// Times score_dataset on synthetic correlated data at each size with fixed K and T.
inline BenchResult run_bench(const BenchConfig& cfg) {
  if (cfg.sizes.empty()) throw ConfigError("bench needs at least one size");
  ForestConfig forest;
  forest.n_trees = cfg.n_trees;
  forest.min_leaf_fraction = cfg.min_leaf_fraction;
  forest.seed = cfg.seed;

  BenchResult result;
  for (auto n : cfg.sizes) {
    const Dataset data = synthetic::correlated_numerical(n, cfg.n_features, cfg.seed);
    result.points.push_back({n, detail::time_scoring(data, forest, cfg.repeats, cfg.threads)});
  }
  double log_sum = 0.0;
  for (std::size_t i = 1; i < result.points.size(); ++i) {
    const double f = result.points[i].seconds / result.points[i - 1].seconds;
    result.doubling_factors.push_back(f);
    log_sum += std::log(f);
  }
  if (!result.doubling_factors.empty())
    result.mean_doubling_factor = std::exp(log_sum / static_cast<double>(result.doubling_factors.size()));

  if (result.points.size() >= 2) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const auto& p : result.points) {
      const double n = static_cast<double>(p.n_rows);
      const double x = std::log(n * std::log(n));
      const double y = std::log(p.seconds);
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
    }
    const double m = static_cast<double>(result.points.size());
    result.nlogn_exponent = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  }

  if (cfg.tree_doubling) {
    const Dataset data = synthetic::correlated_numerical(cfg.sizes.front(), cfg.n_features, cfg.seed);
    ForestConfig doubled = forest;
    doubled.n_trees = 2 * forest.n_trees;
    const double base = detail::time_scoring(data, forest, cfg.repeats, cfg.threads);
    result.tree_doubling_factor = detail::time_scoring(data, doubled, cfg.repeats, cfg.threads) / base;
  }
  return result;
}

inline void print_bench(const BenchConfig& cfg, const BenchResult& r, std::ostream& out) {
  out << "features=" << cfg.n_features << " trees=" << cfg.n_trees << " min_leaf_fraction=" << cfg.min_leaf_fraction
      << '\n';
  out << "n_rows,seconds,doubling_factor\n";
  for (std::size_t i = 0; i < r.points.size(); ++i) {
    out << r.points[i].n_rows << ',' << r.points[i].seconds << ',';
    if (i > 0) out << r.doubling_factors[i - 1];
    out << '\n';
  }
  out << "mean_doubling_factor=" << r.mean_doubling_factor << '\n';
  out << "nlogn_exponent=" << r.nlogn_exponent << '\n';
  if (cfg.tree_doubling) out << "tree_doubling_factor=" << r.tree_doubling_factor << '\n';
}

}  // namespace oobad
