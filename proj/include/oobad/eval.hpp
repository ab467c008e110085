#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "oobad/csv.hpp"
#include "oobad/dataset.hpp"
#include "oobad/error.hpp"
#include "oobad/scoring.hpp"

namespace oobad {

/// Scores with binary labels (1 = anomaly).
struct LabeledScores {
  std::vector<double> scores;
  std::vector<std::uint8_t> labels;
};

/// Mann-Whitney form of ROC AUC with average ranks for tied scores, which
/// equals the area under the trapezoidal ROC curve.
inline double roc_auc(const LabeledScores& ls) {
  const std::size_t n = ls.scores.size();
  if (ls.labels.size() != n) throw std::invalid_argument("scores and labels differ in length");
  std::size_t positives = 0;
  for (auto l : ls.labels) {
    if (l > 1) throw DataError("labels must be 0 or 1");
    positives += l;
  }
  const std::size_t negatives = n - positives;
  if (positives == 0 || negatives == 0) throw DataError("AUC undefined: labels contain a single class");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return ls.scores[a] < ls.scores[b]; });

  // ranks are 1-based; a tie block [i, j) gets the average rank (i + 1 + j) / 2
  double positive_rank_sum = 0.0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i + 1;
    while (j < n && ls.scores[order[j]] == ls.scores[order[i]]) ++j;
    const double avg_rank = static_cast<double>(i + 1 + j) / 2.0;
    for (std::size_t r = i; r < j; ++r)
      if (ls.labels[order[r]]) positive_rank_sum += avg_rank;
    i = j;
  }
  const double p = static_cast<double>(positives);
  return (positive_rank_sum - p * (p + 1.0) / 2.0) / (p * static_cast<double>(negatives));
}

struct RepeatedAuc {
  double mean = 0.0;
  std::vector<double> runs;
  std::vector<std::uint64_t> seeds;
};

/// Scores the (label-free) dataset `repeats` times with seeds seed, seed+1, ...
/// and evaluates each run against the labels.
inline RepeatedAuc repeated_auc(const Dataset& dataset, std::span<const std::uint8_t> labels,
                                const ForestConfig& config, std::size_t repeats, unsigned threads = 0) {
  if (repeats < 1) throw ConfigError("repeats must be at least 1");
  if (labels.size() != dataset.n_rows()) throw DataError("label count does not match dataset rows");
  RepeatedAuc result;
  for (std::size_t r = 0; r < repeats; ++r) {
    ForestConfig run = config;
    run.seed = config.seed + r;
    const auto report = score_dataset(dataset, run, threads);
    const LabeledScores ls{report.total, std::vector<std::uint8_t>(labels.begin(), labels.end())};
    result.runs.push_back(roc_auc(ls));
    result.seeds.push_back(run.seed);
  }
  result.mean = std::accumulate(result.runs.begin(), result.runs.end(), 0.0) / static_cast<double>(repeats);
  return result;
}

/// Reads a binary 0/1 label column for the rows that made it into `dataset`.
inline std::vector<std::uint8_t> extract_binary_labels(const CsvTable& table, const Dataset& dataset,
                                                       const std::string& label_column) {
  const std::size_t c = table.column_index(label_column);
  std::vector<std::uint8_t> labels;
  std::set<std::string> bad;
  labels.reserve(dataset.n_rows());
  for (auto r : dataset.source_rows()) {
    const std::string cell(detail::trim(table.rows.at(r)[c]));
    double v = 0.0;
    if (parse_real(cell, v) && (v == 0.0 || v == 1.0)) {
      labels.push_back(static_cast<std::uint8_t>(v));
    } else {
      bad.insert(cell.empty() ? "<empty>" : cell);
      labels.push_back(0);
    }
  }
  if (!bad.empty()) {
    std::string list;
    for (const auto& b : bad) list += (list.empty() ? "" : ", ") + b;
    throw DataError("label column '" + label_column + "' is not binary; offending values: " + list);
  }
  return labels;
}

/// ceil(pct * n) with a small tolerance so e.g. 0.01 * 1000 is exactly 10.
inline std::size_t removal_count(double pct, std::size_t n) {
  if (!(pct >= 0.0 && pct < 1.0)) throw ConfigError("pct must be in [0, 1), got " + std::to_string(pct));
  const double raw = pct * static_cast<double>(n);
  const auto count = static_cast<std::size_t>(std::ceil(raw - 1e-9 * std::max(1.0, raw)));
  return std::min(count, n);
}

struct FilterResult {
  Dataset kept;
  /// Removed row indices (into the scored dataset), highest score first.
  std::vector<std::size_t> removed;
};

/// Drops the ceil(pct * N) highest-scoring rows; on equal scores the lower
/// row index is removed first. Kept rows stay in their original order.
inline FilterResult filter_top_percent(const Dataset& dataset, const AnomalyReport& report, double pct) {
  if (report.n_rows() != dataset.n_rows()) throw std::invalid_argument("report not aligned with dataset");
  const std::size_t count = removal_count(pct, dataset.n_rows());
  auto order = report.ranking();
  std::vector<std::size_t> removed(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(count));
  std::vector<bool> drop(dataset.n_rows(), false);
  for (auto r : removed) drop[r] = true;
  std::vector<std::size_t> kept;
  kept.reserve(dataset.n_rows() - count);
  for (std::size_t i = 0; i < dataset.n_rows(); ++i)
    if (!drop[i]) kept.push_back(i);
  if (kept.empty()) throw ConfigError("filter would remove every row");
  return {dataset.select_rows(kept), std::move(removed)};
}

}  // namespace oobad
