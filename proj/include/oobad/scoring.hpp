#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "oobad/dataset.hpp"
#include "oobad/error.hpp"
#include "oobad/forest.hpp"

namespace oobad {

namespace detail {

inline double xlogx(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }

inline void check_labels(std::span<const std::int32_t> preds, std::int32_t cardinality) {
  for (auto p : preds)
    if (p < 0 || p >= cardinality)
      throw std::invalid_argument("class label " + std::to_string(p) + " outside [0, " + std::to_string(cardinality) + ")");
}

// Shannon entropy (nats) of a histogram with the given total.
inline double histogram_entropy(std::span<const std::uint32_t> counts, std::size_t total) {
  double h = 0.0;
  const double n = static_cast<double>(total);
  for (auto c : counts) h -= xlogx(static_cast<double>(c) / n);
  return h;
}

}  // namespace detail

/// Entropy of the predicted labels divided by log(C): 0 when all trees
/// agree, 1 when the votes are uniform over all C classes.
inline double categorical_uncertainty(std::span<const std::int32_t> preds, std::int32_t cardinality) {
  if (preds.empty()) throw NoOobModels();
  if (cardinality < 2) throw std::invalid_argument("cardinality must be at least 2");
  detail::check_labels(preds, cardinality);
  std::vector<std::uint32_t> counts(static_cast<std::size_t>(cardinality), 0);
  for (auto p : preds) ++counts[static_cast<std::size_t>(p)];
  return detail::histogram_entropy(counts, preds.size()) / std::log(static_cast<double>(cardinality));
}

/// One minus the fraction of predictions equal to the observed label.
inline double categorical_disagreement(std::span<const std::int32_t> preds, std::int32_t observed) {
  if (preds.empty()) throw NoOobModels();
  const auto agree = std::count(preds.begin(), preds.end(), observed);
  return 1.0 - static_cast<double>(agree) / static_cast<double>(preds.size());
}

struct NumericalScore {
  double uncertainty = 0.0;   // population variance of the predictions
  double disagreement = 0.0;  // squared gap between their mean and the observation
  double total() const { return uncertainty + disagreement; }
};

/// Splits mean((pred - observed)^2) into variance plus squared bias.
inline NumericalScore numerical_score(std::span<const double> preds, double observed) {
  if (preds.empty()) throw NoOobModels();
  const double n = static_cast<double>(preds.size());
  double sum = 0.0;
  for (double p : preds) sum += p;
  const double mean = sum / n;
  double ss = 0.0;
  for (double p : preds) ss += (p - mean) * (p - mean);
  const double bias = mean - observed;
  return {ss / n, bias * bias};
}

/// (x - min) / (max - min); an all-equal input maps to all zeros.
inline std::vector<double> minmax_scale(std::span<const double> raw) {
  std::vector<double> out(raw.size(), 0.0);
  if (raw.empty()) return out;
  const auto [lo_it, hi_it] = std::minmax_element(raw.begin(), raw.end());
  const double lo = *lo_it;
  const double range = *hi_it - lo;
  if (!(range > 0.0)) return out;
  for (std::size_t i = 0; i < raw.size(); ++i) out[i] = std::clamp((raw[i] - lo) / range, 0.0, 1.0);
  return out;
}

struct EntropyBounds {
  double lower = 0.0;
  double upper = 0.0;
};

/// Range of the (unnormalized, natural-log) entropy of a C-class vote
/// distribution that puts mass p on the observed class. The minimum puts all
/// remaining mass on one other class; the maximum spreads it evenly over the
/// other C - 1 classes.
inline EntropyBounds entropy_bounds(double p, std::int32_t cardinality) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("p must be in [0, 1]");
  if (cardinality < 2) throw std::invalid_argument("cardinality must be at least 2");
  const double q = 1.0 - p;
  const double lower = -detail::xlogx(p) - detail::xlogx(q);
  const double spread = q > 0.0 ? -q * std::log(q / static_cast<double>(cardinality - 1)) : 0.0;
  return {lower, -detail::xlogx(p) + spread};
}

struct RowWarning {
  std::size_t row = 0;
  std::string message;
};

/// Scores for one target feature k, one entry per row.
struct FeatureScoreColumn {
  std::size_t feature_index = 0;
  std::string name;
  ColumnKind kind = ColumnKind::numerical();
  std::vector<double> uncertainty;
  std::vector<double> disagreement;
  std::vector<double> raw;
  std::vector<double> scaled;
  std::vector<std::size_t> oob_counts;
  /// Categorical only: OOB vote share of the observed class, i.e. 1 - disagreement.
  std::vector<double> observed_mass;
  std::vector<RowWarning> warnings;

  std::size_t n_rows() const { return raw.size(); }
};

/// Turns OOB predictions for target column `target` into per-row scores.
/// Rows with no OOB trees get zeros and a warning.
inline FeatureScoreColumn score_from_oob(const Column& target, std::size_t feature_index,
                                         const OobPredictionSet& oob) {
  const std::size_t n = target.size();
  if (oob.n_rows() != n) throw std::invalid_argument("OOB predictions not aligned with target column");
  FeatureScoreColumn col;
  col.feature_index = feature_index;
  col.name = target.name;
  col.kind = target.kind;
  col.uncertainty.assign(n, 0.0);
  col.disagreement.assign(n, 0.0);
  col.raw.assign(n, 0.0);
  col.oob_counts.resize(n);

  const bool categorical = target.kind.is_categorical();
  const std::int32_t card = target.kind.cardinality();
  const double log_card = categorical ? std::log(static_cast<double>(card)) : 1.0;
  if (categorical) col.observed_mass.assign(n, 0.0);
  std::vector<std::uint32_t> counts(categorical ? static_cast<std::size_t>(card) : 0);

  for (std::size_t i = 0; i < n; ++i) {
    const auto preds = oob.row(i);
    col.oob_counts[i] = preds.size();
    if (preds.empty()) {
      col.warnings.push_back({i, "no OOB trees for row; feature score set to 0"});
      continue;
    }
    if (categorical) {
      std::fill(counts.begin(), counts.end(), 0u);
      for (double p : preds) ++counts[static_cast<std::size_t>(p)];
      const auto observed = static_cast<std::size_t>(target.codes[i]);
      const double mass = static_cast<double>(counts[observed]) / static_cast<double>(preds.size());
      col.uncertainty[i] = detail::histogram_entropy(counts, preds.size()) / log_card;
      col.disagreement[i] = 1.0 - mass;
      col.observed_mass[i] = mass;
    } else {
      const auto s = numerical_score(preds, target.values[i]);
      col.uncertainty[i] = s.uncertainty;
      col.disagreement[i] = s.disagreement;
    }
    col.raw[i] = col.uncertainty[i] + col.disagreement[i];
  }
  col.scaled = minmax_scale(col.raw);
  return col;
}

/// Fits the forest for target k on the other columns and scores every row.
inline FeatureScoreColumn score_feature(const Dataset& dataset, std::size_t k, const ForestConfig& config,
                                        unsigned threads = 0) {
  const auto split = split_features(dataset, k);
  const Forest forest = fit_forest(split.predictors, *split.target, config, threads);
  return score_from_oob(*split.target, k, oob_predictions(forest, split.predictors, threads));
}

/// Per-row totals plus the per-feature breakdown.
struct AnomalyReport {
  std::vector<std::string> feature_names;
  std::vector<FeatureScoreColumn> features;
  std::vector<double> total;
  std::vector<std::size_t> source_rows;
  std::vector<std::pair<std::string, std::string>> config_echo;

  std::size_t n_rows() const { return total.size(); }
  std::size_t n_features() const { return features.size(); }
  double scaled(std::size_t i, std::size_t k) const { return features[k].scaled[i]; }

  std::size_t warning_count() const {
    std::size_t n = 0;
    for (const auto& f : features) n += f.warnings.size();
    return n;
  }

  /// Row indices ordered by descending total, lower index first on ties.
  std::vector<std::size_t> ranking() const {
    std::vector<std::size_t> order(total.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return total[a] > total[b]; });
    return order;
  }
};

/// S_i = sum over features of the scaled score, in feature order.
inline std::vector<double> aggregate_scaled(std::span<const FeatureScoreColumn> features, std::size_t n_rows) {
  std::vector<double> total(n_rows, 0.0);
  for (const auto& f : features) {
    if (f.scaled.size() != n_rows) throw std::invalid_argument("feature score column has wrong length");
    for (std::size_t i = 0; i < n_rows; ++i) total[i] += f.scaled[i];
  }
  return total;
}

inline std::vector<std::pair<std::string, std::string>> describe(const ForestConfig& config) {
  return {{"trees", std::to_string(config.n_trees)},
          {"min_leaf_fraction", std::to_string(config.min_leaf_fraction)},
          {"mtry", config.mtry.to_string()},
          {"seed", std::to_string(config.seed)}};
}

inline AnomalyReport assemble_report(const Dataset& dataset, std::vector<FeatureScoreColumn> features) {
  AnomalyReport report;
  report.feature_names = dataset.column_names();
  report.total = aggregate_scaled(features, dataset.n_rows());
  report.features = std::move(features);
  report.source_rows.assign(dataset.source_rows().begin(), dataset.source_rows().end());
  return report;
}

/// One fitted forest per feature column, in column order.
inline std::vector<Forest> fit_models(const Dataset& dataset, const ForestConfig& config, unsigned threads = 0) {
  std::vector<Forest> models;
  models.reserve(dataset.n_cols());
  for (std::size_t k = 0; k < dataset.n_cols(); ++k) {
    const auto split = split_features(dataset, k);
    models.push_back(fit_forest(split.predictors, *split.target, config, threads));
  }
  return models;
}

/// Scores a dataset with forests already fitted on it (row-aligned).
inline AnomalyReport score_with_models(const Dataset& dataset, std::span<const Forest> models, unsigned threads = 0) {
  if (models.size() != dataset.n_cols()) throw ConfigError("model has a different number of features than the data");
  std::vector<FeatureScoreColumn> features;
  features.reserve(models.size());
  for (std::size_t k = 0; k < models.size(); ++k) {
    const auto split = split_features(dataset, k);
    if (models[k].n_rows() != dataset.n_rows())
      throw ConfigError("model was fitted on " + std::to_string(models[k].n_rows()) + " rows, data has " +
                        std::to_string(dataset.n_rows()));
    if (!(models[k].task() == task_for(*split.target)))
      throw ConfigError("model task for feature '" + split.target->name + "' does not match the data");
    features.push_back(score_from_oob(*split.target, k, oob_predictions(models[k], split.predictors, threads)));
  }
  return assemble_report(dataset, std::move(features));
}

/// Full pipeline: one forest per feature, OOB scores, min-max scaling, sum.
inline AnomalyReport score_dataset(const Dataset& dataset, const ForestConfig& config, unsigned threads = 0) {
  std::vector<FeatureScoreColumn> features;
  features.reserve(dataset.n_cols());
  for (std::size_t k = 0; k < dataset.n_cols(); ++k) features.push_back(score_feature(dataset, k, config, threads));
  auto report = assemble_report(dataset, std::move(features));
  report.config_echo = describe(config);
  return report;
}

}  // namespace oobad
