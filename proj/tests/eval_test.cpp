#include "oobad/eval.hpp"

#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "oobad/synthetic.hpp"

namespace oobad {
namespace {

// Reference AUC: fraction of (positive, negative) pairs ordered correctly,
// ties counting one half.
double pairwise_auc(const std::vector<double>& s, const std::vector<std::uint8_t>& y) {
  double wins = 0.0;
  double pairs = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (!y[i]) continue;
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (y[j]) continue;
      pairs += 1.0;
      wins += s[i] > s[j] ? 1.0 : (s[i] == s[j] ? 0.5 : 0.0);
    }
  }
  return wins / pairs;
}

TEST(RocAuc, Examples) {
  EXPECT_EQ(roc_auc({{0.1, 0.2, 0.8, 0.9}, {0, 0, 1, 1}}), 1.0);
  EXPECT_EQ(roc_auc({{0.5, 0.5, 0.5, 0.5}, {0, 1, 0, 1}}), 0.5);
  const LabeledScores mixed{{0.1, 0.4, 0.35, 0.8}, {0, 0, 1, 1}};
  EXPECT_EQ(roc_auc(mixed), 0.75);
  EXPECT_EQ(pairwise_auc(mixed.scores, mixed.labels), 0.75);
  EXPECT_EQ(roc_auc({{0.9, 0.8, 0.2, 0.1}, {0, 0, 1, 1}}), 0.0);
}

TEST(RocAuc, SingleClassIsAnError) {
  EXPECT_THROW(roc_auc({{0.1, 0.2}, {1, 1}}), DataError);
  EXPECT_THROW(roc_auc({{0.1, 0.2}, {0, 0}}), DataError);
  EXPECT_THROW(roc_auc({{0.1, 0.2}, {0, 2}}), DataError);
}

TEST(RocAuc, MatchesPairwiseCountWithTies) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 2 + rng() % 60;
    LabeledScores ls;
    for (std::size_t i = 0; i < n; ++i) {
      ls.scores.push_back(static_cast<double>(rng() % 7));  // coarse grid, many ties
      ls.labels.push_back(static_cast<std::uint8_t>(rng() % 2));
    }
    ls.labels[0] = 0;
    ls.labels[1] = 1;
    ASSERT_NEAR(roc_auc(ls), pairwise_auc(ls.scores, ls.labels), 1e-12) << "trial " << trial;
  }
}

TEST(RocAuc, ComplementAndMonotoneInvariance) {
  std::mt19937_64 rng(22);
  std::normal_distribution<double> z(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    LabeledScores ls;
    for (int i = 0; i < 80; ++i) {
      const std::uint8_t y = static_cast<std::uint8_t>(i % 3 == 0);
      ls.labels.push_back(y);
      ls.scores.push_back(std::round((z(rng) + y) * 4.0) / 4.0);
    }
    const double auc = roc_auc(ls);
    LabeledScores flipped = ls;
    for (auto& y : flipped.labels) y = 1 - y;
    EXPECT_NEAR(roc_auc(flipped), 1.0 - auc, 1e-12);
    LabeledScores transformed = ls;
    for (auto& s : transformed.scores) s = std::exp(3.0 * s) + 7.0;
    EXPECT_NEAR(roc_auc(transformed), auc, 1e-12);
  }
}

AnomalyReport report_with_totals(std::vector<double> totals) {
  AnomalyReport r;
  r.total = std::move(totals);
  return r;
}

Dataset indexed_dataset(std::size_t n) {
  std::vector<double> a(n), b(n);
  for (std::size_t i = 0; i < n; ++i) {
    a[i] = static_cast<double>(i);
    b[i] = static_cast<double>(i) * 0.5 + 0.25;
  }
  return Dataset({Column::make_numerical("a", a), Column::make_numerical("b", b)});
}

TEST(Filter, ZeroPercentKeepsEverything) {
  const auto d = indexed_dataset(10);
  const auto r = filter_top_percent(d, report_with_totals({1, 2, 3, 4, 5, 6, 7, 8, 9, 10}), 0.0);
  EXPECT_TRUE(r.removed.empty());
  EXPECT_EQ(r.kept.n_rows(), 10u);
}

TEST(Filter, RemovesCeilingCount) {
  const auto d = indexed_dataset(10);
  const auto r = filter_top_percent(d, report_with_totals({1, 9, 3, 4, 5, 6, 7, 8, 2, 10}), 0.15);
  EXPECT_EQ(r.removed, (std::vector<std::size_t>{9, 1}));
  EXPECT_EQ(r.kept.n_rows(), 8u);
  EXPECT_EQ(removal_count(0.01, 1000), 10u);
  EXPECT_EQ(removal_count(0.001, 10), 1u);
}

TEST(Filter, TiesRemoveLowerIndexFirst) {
  const auto d = indexed_dataset(4);
  const auto r = filter_top_percent(d, report_with_totals({5, 1, 4, 2}), 0.5);
  EXPECT_EQ(r.removed, (std::vector<std::size_t>{0, 2}));
  const auto kept = r.kept.source_rows();
  EXPECT_EQ(std::vector<std::size_t>(kept.begin(), kept.end()), (std::vector<std::size_t>{1, 3}));

  const auto tied = filter_top_percent(d, report_with_totals({1, 1, 1, 1}), 0.5);
  EXPECT_EQ(tied.removed, (std::vector<std::size_t>{0, 1}));
}

TEST(Filter, RejectsOutOfRangePct) {
  const auto d = indexed_dataset(4);
  const auto totals = report_with_totals({1, 2, 3, 4});
  EXPECT_THROW(filter_top_percent(d, totals, 1.0), ConfigError);
  EXPECT_THROW(filter_top_percent(d, totals, -0.1), ConfigError);
  EXPECT_THROW(removal_count(std::nan(""), 4), ConfigError);
}

TEST(Filter, KeptRowsNeverOutscoreRemovedOnes) {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 5 + rng() % 100;
    std::vector<double> totals(n);
    for (auto& t : totals) t = static_cast<double>(rng() % 20);
    const double pct = std::uniform_real_distribution<double>(0.0, 0.9)(rng);
    const auto d = indexed_dataset(n);
    const auto r = filter_top_percent(d, report_with_totals(totals), pct);
    ASSERT_EQ(r.removed.size(), removal_count(pct, n));
    ASSERT_EQ(r.removed.size() + r.kept.n_rows(), n);
    double min_removed = 1e300;
    for (auto i : r.removed) min_removed = std::min(min_removed, totals[i]);
    for (auto src : r.kept.source_rows()) ASSERT_LE(totals[src], min_removed);
  }
}

TEST(Labels, ExtractsBinaryColumn) {
  const auto table = parse_csv("a,b,label\n1.5,2.5,0\n2.5,3.5,1\n3.5,4.5,0\n");
  SchemaConfig schema;
  schema.exclude = {"label"};
  const Dataset d = build_dataset(table, schema);
  EXPECT_EQ(extract_binary_labels(table, d, "label"), (std::vector<std::uint8_t>{0, 1, 0}));
  EXPECT_THROW(extract_binary_labels(table, d, "nope"), ConfigError);
}

TEST(Labels, NonBinaryValuesAreListed) {
  const auto table = parse_csv("a,b,label\n1.5,2.5,0\n2.5,3.5,2\n3.5,4.5,yes\n");
  SchemaConfig schema;
  schema.exclude = {"label"};
  const Dataset d = build_dataset(table, schema);
  try {
    extract_binary_labels(table, d, "label");
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("2"), std::string::npos) << msg;
    EXPECT_NE(msg.find("yes"), std::string::npos) << msg;
  }
}

TEST(RepeatedAuc, SingleRunUsesBaseSeed) {
  const auto planted = synthetic::planted_mixed(120, 3, 3, 31);
  std::vector<std::uint8_t> labels(120, 0);
  for (auto r : planted.mislabelled) labels[r] = 1;
  for (auto r : planted.outliers) labels[r] = 1;
  ForestConfig c;
  c.n_trees = 40;
  c.seed = 77;
  const auto result = repeated_auc(planted.data, labels, c, 1);
  ASSERT_EQ(result.runs.size(), 1u);
  EXPECT_EQ(result.seeds, (std::vector<std::uint64_t>{77}));
  EXPECT_EQ(result.mean, result.runs[0]);
  const auto report = score_dataset(planted.data, c);
  EXPECT_EQ(result.runs[0], roc_auc({report.total, labels}));
  EXPECT_THROW(repeated_auc(planted.data, labels, c, 0), ConfigError);
}

double variance(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m += x;
  m /= static_cast<double>(v.size());
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size());
}

// More trees average away seed noise.
TEST(RepeatedAuc, VarianceShrinksWithMoreTrees) {
  const auto planted = synthetic::planted_mixed(150, 4, 4, 41);
  std::vector<std::uint8_t> labels(150, 0);
  for (auto r : planted.mislabelled) labels[r] = 1;
  for (auto r : planted.outliers) labels[r] = 1;
  ForestConfig few;
  few.n_trees = 10;
  ForestConfig many;
  many.n_trees = 300;
  const auto a = repeated_auc(planted.data, labels, few, 8);
  const auto b = repeated_auc(planted.data, labels, many, 8);
  EXPECT_LT(variance(b.runs), variance(a.runs));
}

}  // namespace
}  // namespace oobad
