#include "oobad/forest.hpp"

#include <cmath>
#include <numeric>
#include <sstream>
#include <vector>

#include <gtest/gtest.h>

#include "oobad/model_io.hpp"
#include "oobad/synthetic.hpp"

namespace oobad {
namespace {

std::vector<const Column*> predictors_of(const Dataset& d, std::size_t target) {
  return split_features(d, target).predictors;
}

TEST(Bootstrap, SingleRowIsAlwaysInBag) {
  Rng rng(3);
  EXPECT_EQ(bootstrap_sample(1, rng), (std::vector<std::uint32_t>{1}));
}

TEST(Bootstrap, CountsSumToN) {
  Rng rng(5);
  for (std::size_t n : {1, 2, 7, 100, 1000}) {
    const auto counts = bootstrap_sample(n, rng);
    ASSERT_EQ(counts.size(), n);
    EXPECT_EQ(std::accumulate(counts.begin(), counts.end(), std::size_t{0}), n);
  }
}

TEST(Bootstrap, OobFractionMatchesClosedForm) {
  // Monte-Carlo over 500 independently seeded draws of n = 1000
  const std::size_t n = 1000;
  const double expected = std::pow(1.0 - 1.0 / static_cast<double>(n), static_cast<double>(n));
  std::size_t zeros = 0;
  for (std::uint64_t t = 0; t < 500; ++t) {
    Rng rng(derive_seed(42, t));
    for (auto c : bootstrap_sample(n, rng)) zeros += c == 0;
  }
  const double fraction = static_cast<double>(zeros) / (500.0 * n);
  EXPECT_NEAR(expected, 0.3677, 1e-4);
  EXPECT_NEAR(fraction, expected, 0.02);
}

TEST(ForestConfig, Validation) {
  ForestConfig c;
  EXPECT_NO_THROW(c.validate(3));
  c.n_trees = 0;
  EXPECT_THROW(c.validate(3), ConfigError);
  c = {};
  c.min_leaf_fraction = 0.0;
  EXPECT_THROW(c.validate(3), ConfigError);
  c.min_leaf_fraction = 1.5;
  EXPECT_THROW(c.validate(3), ConfigError);
  c = {};
  c.mtry = MtryRule::fixed(4);
  EXPECT_THROW(c.validate(3), ConfigError);
  c.mtry = MtryRule::fixed(3);
  EXPECT_NO_THROW(c.validate(3));
}

TEST(ForestConfig, MinLeafSizeIsCeiling) {
  ForestConfig c;
  EXPECT_EQ(c.min_leaf_size(214), 9u);   // 8.56
  EXPECT_EQ(c.min_leaf_size(250), 10u);  // exactly 10
  EXPECT_EQ(c.min_leaf_size(10), 1u);    // 0.4
  c.min_leaf_fraction = 1.0;
  EXPECT_EQ(c.min_leaf_size(37), 37u);
}

TEST(MtryRule, Resolution) {
  EXPECT_EQ(MtryRule::sqrt().resolve(1), 1u);
  EXPECT_EQ(MtryRule::sqrt().resolve(8), 2u);
  EXPECT_EQ(MtryRule::sqrt().resolve(9), 3u);
  EXPECT_EQ(MtryRule::sqrt().resolve(32), 5u);
  EXPECT_EQ(MtryRule::all().resolve(32), 32u);
  EXPECT_EQ(MtryRule::parse("7").resolve(32), 7u);
  EXPECT_THROW(MtryRule::parse("0"), ConfigError);
  EXPECT_THROW(MtryRule::parse("half"), ConfigError);
}

TEST(PredictTree, SingleLeafRegression) {
  Tree t(Task::regression());
  t.add_regression_leaf(7.5, 4);
  EXPECT_EQ(predict_tree(t, std::vector<double>{-100.0}), 7.5);
  EXPECT_EQ(predict_tree(t, std::vector<double>{1e300}), 7.5);
}

TEST(PredictTree, ClassTieGoesToLowestCode) {
  Tree t(Task::classification(2));
  const std::vector<std::uint32_t> counts{3, 3};
  t.add_classification_leaf(counts);
  EXPECT_EQ(predict_tree(t, std::vector<double>{0.0}), 0.0);
}

TEST(PredictTree, BoundaryRoutesLeft) {
  Tree t(Task::regression());
  const auto root = t.add_internal(0, 2.5, 10);
  const auto a = t.add_regression_leaf(1.0, 5);
  const auto b = t.add_regression_leaf(2.0, 5);
  t.set_children(root, a, b);
  EXPECT_EQ(predict_tree(t, std::vector<double>{2.5}), 1.0);
  EXPECT_EQ(predict_tree(t, std::vector<double>{std::nextafter(2.5, 3.0)}), 2.0);
  EXPECT_EQ(predict_tree(t, std::vector<double>{-1.0}), 1.0);
}

TEST(FitForest, PureTargetGivesSingleLeafTrees) {
  const Dataset d({Column::make_categorical("y", std::vector<std::int32_t>(50, 1), {"a", "b"}),
                   synthetic::correlated_numerical(50, 2, 1).column(0)});
  ForestConfig c;
  c.n_trees = 20;
  const auto preds = predictors_of(d, 0);
  const Forest f = fit_forest(preds, d.column(0), c);
  for (const Tree& t : f.trees()) {
    ASSERT_EQ(t.size(), 1u);
    EXPECT_EQ(t.node(0).value, 1.0);
  }
}

TEST(FitForest, FullLeafFractionGivesBootstrapMean) {
  const auto d = synthetic::correlated_numerical(60, 3, 9);
  ForestConfig c;
  c.n_trees = 1;
  c.min_leaf_fraction = 1.0;
  const auto preds = predictors_of(d, 0);
  const Forest f = fit_forest(preds, d.column(0), c);
  ASSERT_EQ(f.tree(0).size(), 1u);
  const auto bag = f.in_bag_counts(0);
  double sum = 0.0;
  for (std::size_t i = 0; i < d.n_rows(); ++i) sum += bag[i] * d.column(0).values[i];
  EXPECT_NEAR(f.tree(0).node(0).value, sum / static_cast<double>(d.n_rows()), 1e-12);
}

TEST(FitForest, SeparableClassesAreLearnedOutOfBag) {
  std::vector<double> x;
  std::vector<std::int32_t> y;
  for (int i = 0; i < 100; ++i) {
    x.push_back(-1.0 - i * 0.01);
    y.push_back(0);
    x.push_back(1.0 + i * 0.01);
    y.push_back(1);
  }
  const Dataset d({Column::make_categorical("y", y, {"A", "B"}), Column::make_numerical("x", x)});
  ForestConfig c;
  c.n_trees = 100;
  c.seed = 4;
  const auto preds = predictors_of(d, 0);
  const Forest f = fit_forest(preds, d.column(0), c);
  const auto oob = oob_predictions(f, preds);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < d.n_rows(); ++i) {
    const auto labels = oob.labels(i);
    ASSERT_FALSE(labels.empty());
    const auto ones = std::count(labels.begin(), labels.end(), 1);
    const std::int32_t vote = 2 * static_cast<std::size_t>(ones) > labels.size() ? 1 : 0;
    correct += vote == y[i];
  }
  EXPECT_GE(static_cast<double>(correct) / d.n_rows(), 0.99);
}

TEST(FitForest, LeavesRespectMinimumSize) {
  const auto d = synthetic::correlated_numerical(400, 4, 2);
  ForestConfig c;
  c.n_trees = 30;
  c.min_leaf_fraction = 0.04;
  const auto preds = predictors_of(d, 1);
  const Forest f = fit_forest(preds, d.column(1), c);
  const std::size_t min_leaf = c.min_leaf_size(d.n_rows());
  for (const Tree& t : f.trees()) {
    EXPECT_GT(t.size(), 1u);
    for (const auto& n : t.nodes())
      if (n.is_leaf()) {
        EXPECT_GE(n.n_samples, min_leaf);
      }
  }
}

// Re-routes each tree's bootstrap rows and checks every leaf stores the
// arithmetic mean of exactly the targets that land in it.
TEST(FitForest, RegressionLeafIsMeanOfItsBootstrapTargets) {
  const auto d = synthetic::correlated_numerical(300, 3, 8);
  ForestConfig c;
  c.n_trees = 10;
  const auto preds = predictors_of(d, 2);
  const Forest f = fit_forest(preds, d.column(2), c);
  const auto view = make_predictor_view(preds);
  for (std::size_t t = 0; t < f.n_trees(); ++t) {
    const Tree& tree = f.tree(t);
    std::vector<double> sum(tree.size(), 0.0);
    std::vector<std::size_t> count(tree.size(), 0);
    for (std::size_t i = 0; i < d.n_rows(); ++i) {
      const auto& leaf = tree.route([&](std::int32_t j) { return view[static_cast<std::size_t>(j)][i]; });
      const auto id = static_cast<std::size_t>(&leaf - tree.nodes().data());
      sum[id] += f.in_bag_count(t, i) * d.column(2).values[i];
      count[id] += f.in_bag_count(t, i);
    }
    for (std::size_t id = 0; id < tree.size(); ++id) {
      if (!tree.node(id).is_leaf()) continue;
      ASSERT_EQ(count[id], tree.node(id).n_samples);
      EXPECT_NEAR(tree.node(id).value, sum[id] / static_cast<double>(count[id]), 1e-12);
    }
  }
}

TEST(FitForest, IdenticalAcrossThreadCounts) {
  const auto planted = synthetic::planted_mixed(200, 4, 4, 3);
  ForestConfig c;
  c.n_trees = 40;
  c.seed = 99;
  for (std::size_t k : {0u, 3u}) {
    const auto preds = predictors_of(planted.data, k);
    const Forest a = fit_forest(preds, planted.data.column(k), c, 1);
    const Forest b = fit_forest(preds, planted.data.column(k), c, 4);
    std::ostringstream sa, sb;
    save_model({{"x"}, {a}}, sa);
    save_model({{"x"}, {b}}, sb);
    EXPECT_EQ(sa.str(), sb.str());
    const auto oa = oob_predictions(a, preds, 1);
    const auto ob = oob_predictions(b, preds, 3);
    for (std::size_t i = 0; i < planted.data.n_rows(); ++i) {
      const auto ra = oa.row(i);
      const auto rb = ob.row(i);
      ASSERT_TRUE(std::equal(ra.begin(), ra.end(), rb.begin(), rb.end()));
    }
  }
}

TEST(OobPredictions, SingleTreeInBagRowIsEmpty) {
  Tree t(Task::regression());
  t.add_regression_leaf(1.0, 2);
  // row 0 drawn twice, row 1 never
  const Forest f(Task::regression(), 2, {t}, {2, 0});
  const Column x = Column::make_numerical("x", {0.0, 1.0});
  const std::vector<const Column*> preds{&x};
  const auto oob = oob_predictions(f, preds);
  EXPECT_EQ(oob.count(0), 0u);
  EXPECT_EQ(oob.count(1), 1u);
}

TEST(OobPredictions, TreeOrderIsPreserved) {
  Tree t0(Task::regression()), t1(Task::regression()), t2(Task::regression());
  t0.add_regression_leaf(10.0, 2);
  t1.add_regression_leaf(20.0, 2);
  t2.add_regression_leaf(30.0, 2);
  const Forest f(Task::regression(), 2, {t0, t1, t2}, {0, 2, 2, 0, 0, 2});
  const Column x = Column::make_numerical("x", {0.0, 1.0});
  const std::vector<const Column*> preds{&x};
  const auto oob = oob_predictions(f, preds);
  const auto r0 = oob.row(0);
  ASSERT_EQ(r0.size(), 2u);
  EXPECT_EQ(r0[0], 10.0);
  EXPECT_EQ(r0[1], 30.0);
  ASSERT_EQ(oob.count(1), 1u);
  EXPECT_EQ(oob.row(1)[0], 20.0);
}

TEST(OobPredictions, OnlyTreesThatNeverSawTheRow) {
  const auto d = synthetic::correlated_numerical(150, 3, 21);
  ForestConfig c;
  c.n_trees = 60;
  const auto preds = predictors_of(d, 0);
  const Forest f = fit_forest(preds, d.column(0), c);
  const auto view = make_predictor_view(preds);
  const auto oob = oob_predictions(f, preds);
  for (std::size_t i = 0; i < d.n_rows(); ++i) {
    std::vector<double> expected;
    for (std::size_t t = 0; t < f.n_trees(); ++t)
      if (f.in_bag_count(t, i) == 0) expected.push_back(predict_tree(f.tree(t), view, i));
    const auto got = oob.row(i);
    ASSERT_TRUE(std::equal(expected.begin(), expected.end(), got.begin(), got.end())) << "row " << i;
  }
}

// log P(X < k) for X ~ Binomial(n, p), summed in log space.
double binomial_lower_tail(int n, double p, int k) {
  double total = 0.0;
  for (int j = 0; j < k; ++j) {
    const double log_term = std::lgamma(n + 1.0) - std::lgamma(j + 1.0) - std::lgamma(n - j + 1.0) +
                            j * std::log(p) + (n - j) * std::log1p(-p);
    total += std::exp(log_term);
  }
  return total;
}

TEST(OobPredictions, GlassSizedForestHasManyOobTreesPerRow) {
  const int n = 214;
  const double p = std::pow(1.0 - 1.0 / n, n);
  // union bound over rows: the chance any row has < 100 OOB trees
  ASSERT_LT(n * binomial_lower_tail(500, p, 100), 1e-9);

  const auto d = synthetic::correlated_numerical(n, 3, 5);
  const auto preds = predictors_of(d, 0);
  const Forest f = fit_forest(preds, d.column(0), ForestConfig{});
  const auto oob = oob_predictions(f, preds);
  std::size_t min_count = 500;
  double mean = 0.0;
  for (std::size_t i = 0; i < d.n_rows(); ++i) {
    min_count = std::min(min_count, oob.count(i));
    mean += static_cast<double>(oob.count(i));
  }
  mean /= static_cast<double>(n) * 500.0;
  EXPECT_GE(min_count, 100u);
  EXPECT_NEAR(mean, p, 0.02);
}

TEST(ModelIo, RoundTripIsExact) {
  const auto planted = synthetic::planted_mixed(120, 3, 3, 17);
  ForestConfig c;
  c.n_trees = 15;
  ModelBundle model;
  for (std::size_t k = 0; k < planted.data.n_cols(); ++k) {
    const auto preds = predictors_of(planted.data, k);
    model.feature_names.push_back(planted.data.column(k).name);
    model.forests.push_back(fit_forest(preds, planted.data.column(k), c));
  }
  std::stringstream first;
  save_model(model, first);
  const ModelBundle loaded = load_model(first);
  std::ostringstream second;
  save_model(loaded, second);
  EXPECT_EQ(first.str(), second.str());
  ASSERT_EQ(loaded.forests.size(), model.forests.size());
  for (std::size_t k = 0; k < model.forests.size(); ++k) {
    const auto preds = predictors_of(planted.data, k);
    const auto a = oob_predictions(model.forests[k], preds);
    const auto b = oob_predictions(loaded.forests[k], preds);
    for (std::size_t i = 0; i < planted.data.n_rows(); ++i) {
      const auto ra = a.row(i);
      const auto rb = b.row(i);
      ASSERT_TRUE(std::equal(ra.begin(), ra.end(), rb.begin(), rb.end()));
    }
  }
}

TEST(ModelIo, RejectsCorruptInput) {
  std::istringstream wrong_magic("not-a-model 1\n");
  EXPECT_THROW(load_model(wrong_magic), DataError);
  std::istringstream wrong_version("oobad-model 9\n");
  EXPECT_THROW(load_model(wrong_version), DataError);
  std::istringstream cycle(
      "oobad-model 1\nfeatures 2\nfeature 0 \"a\" classes 0 rows 1 trees 1\ninbag 1\n"
      "tree 1 0\nn 0 0x0p+0 0 0 0x0p+0 1 0\nc\n");
  EXPECT_THROW(load_model(cycle), DataError);
}

}  // namespace
}  // namespace oobad
