//
// Project llm4sd - Copyright 2026 The llm4sd Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <set>

#include "llm4sd/learners/forest.hpp"
#include "llm4sd/learners/linear.hpp"
#include "llm4sd/learners/model.hpp"
#include "llm4sd/learners/rng.hpp"

namespace llm4sd::learn {
namespace {

// Two informative features, one noise column.
struct Data {
  Matrix x;
  std::vector<double> y;
};

Data classification_data(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> v;
  std::vector<double> y;
  for (std::size_t i = 0; i < n; ++i) {
    const double a = g(rng), b = g(rng), c = g(rng);
    v.insert(v.end(), {a, b, c});
    y.push_back(a + 0.5 * b + 0.3 * g(rng) > 0 ? 1.0 : 0.0);
  }
  return {Matrix(n, 3, v), y};
}

Data regression_data(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> v;
  std::vector<double> y;
  for (std::size_t i = 0; i < n; ++i) {
    const double a = g(rng), b = g(rng);
    v.insert(v.end(), {a, b});
    y.push_back(2 * a - b + 0.1 * g(rng));
  }
  return {Matrix(n, 2, v), y};
}

ForestParams small(int trees = 25) {
  ForestParams p;
  p.n_trees = trees;
  return p;
}

TEST(CounterRng, SameSeedAndStreamRepeat) {
  CounterRng a(42, 3), b(42, 3), c(42, 4);
  bool differs = false;
  for (int i = 0; i < 100; ++i) {
    const auto va = a(), vb = b(), vc = c();
    EXPECT_EQ(va, vb);
    differs |= va != vc;
  }
  EXPECT_TRUE(differs);
}

TEST(CounterRng, BoundedStaysInRange) {
  CounterRng r(1, 0);
  std::set<std::uint64_t> seen;
  for (int i = 0; i < 2000; ++i) {
    const auto v = r.bounded(7);
    ASSERT_LT(v, 7U);
    seen.insert(v);
  }
  EXPECT_EQ(seen.size(), 7U);
  for (int i = 0; i < 1000; ++i) {
    const double u = r.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
  }
}

TEST(Forest, SameSeedGivesSameModelHash) {
  const Data d = classification_data(200, 5);
  const Forest a = train_forest(d.x, d.y, TaskKind::kClassification, small(), 17);
  const Forest b = train_forest(d.x, d.y, TaskKind::kClassification, small(), 17);
  EXPECT_EQ(model_hash(Model(a)), model_hash(Model(b)));
  const Forest c = train_forest(d.x, d.y, TaskKind::kClassification, small(), 18);
  EXPECT_NE(model_hash(Model(a)), model_hash(Model(c)));
}

TEST(Forest, ThreadCountDoesNotChangeModel) {
  const Data d = regression_data(150, 2);
  ForestParams p1 = small(16), p4 = small(16);
  p1.threads = 1;
  p4.threads = 4;
  const Forest a = train_forest(d.x, d.y, TaskKind::kRegression, p1, 9);
  const Forest b = train_forest(d.x, d.y, TaskKind::kRegression, p4, 9);
  EXPECT_EQ(a.trees, b.trees);
}

TEST(Forest, UnbootstrappedTreeFitsConsistentDataExactly) {
  const Data d = classification_data(120, 11);
  ForestParams p;
  p.n_trees = 1;
  p.bootstrap = false;
  p.max_features = 3;
  const Forest f = train_forest(d.x, d.y, TaskKind::kClassification, p, 1);
  for (std::size_t i = 0; i < d.x.rows; ++i)
    EXPECT_EQ(predict(f, d.x.row(i)), d.y[i]) << "row " << i;

  const Data r = regression_data(80, 4);
  p.min_samples_leaf = 1;
  p.max_features = 2;
  const Forest g = train_forest(r.x, r.y, TaskKind::kRegression, p, 1);
  for (std::size_t i = 0; i < r.x.rows; ++i)
    EXPECT_DOUBLE_EQ(predict(g, r.x.row(i)), r.y[i]);
}

TEST(Forest, ImportancesSumToOne) {
  const Data d = classification_data(300, 3);
  const Forest f = train_forest(d.x, d.y, TaskKind::kClassification, small(40), 2);
  const auto imp = importances(f);
  ASSERT_EQ(imp.size(), 3U);
  EXPECT_NEAR(std::accumulate(imp.begin(), imp.end(), 0.0), 1.0, 1e-9);
  // The noise column matters least.
  EXPECT_LT(imp[2], imp[0]);
  EXPECT_LT(imp[2], imp[1]);
  for (double v: imp)
    EXPECT_GE(v, 0.0);
}

TEST(Forest, ConstantTargetGivesZeroImportances) {
  Matrix x(4, 1, {1, 2, 3, 4});
  const Forest f = train_forest(x, {1, 1, 1, 1}, TaskKind::kClassification, small(3), 0);
  for (double v: importances(f))
    EXPECT_EQ(v, 0.0);
  EXPECT_EQ(predict(f, {2.5}), 1.0);
}

TEST(Forest, PredictionsAreProbabilities) {
  const Data d = classification_data(200, 8);
  const Forest f = train_forest(d.x, d.y, TaskKind::kClassification, small(), 4);
  for (std::size_t i = 0; i < d.x.rows; ++i) {
    const double p = predict(f, d.x.row(i));
    ASSERT_GE(p, 0.0);
    ASSERT_LE(p, 1.0);
  }
}

TEST(Forest, RejectsBadInput) {
  Matrix x(2, 1, {0, 1});
  EXPECT_THROW(train_forest(x, {0, 2}, TaskKind::kClassification, small(), 0), LearnError);
  EXPECT_THROW(train_forest(x, {0}, TaskKind::kClassification, small(), 0), LearnError);
  EXPECT_THROW(train_forest(Matrix(), {}, TaskKind::kRegression, small(), 0), LearnError);
  const Forest f = train_forest(x, {0, 1}, TaskKind::kClassification, small(2), 0);
  EXPECT_THROW(predict(f, {1.0, 2.0}), LearnError);
}

TEST(Forest, JsonRoundTrip) {
  const Data d = regression_data(60, 1);
  const Forest f = train_forest(d.x, d.y, TaskKind::kRegression, small(5), 3);
  const Forest g = forest_from_json(nlohmann::json::parse(to_json(f).dump()));
  EXPECT_EQ(f, g);
  EXPECT_THROW(forest_from_json(nlohmann::json{{"format", "other"}}), LearnError);
}

TEST(Forest, RegressionPredictionsStayWithinTrainingRange) {
  const Data d = regression_data(150, 8);
  const auto [lo, hi] = std::minmax_element(d.y.begin(), d.y.end());
  const Forest f = train_forest(d.x, d.y, TaskKind::kRegression, small(), 4);
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  for (int i = 0; i < 500; ++i) {
    const double p = predict(f, {u(rng), u(rng)});
    EXPECT_GE(p, *lo);
    EXPECT_LE(p, *hi);
  }
}

TEST(Forest, SingleTreeOnMonotoneTargetIsStepFunction) {
  std::vector<double> xs, y;
  for (int i = 0; i < 20; ++i) {
    xs.push_back(i);
    y.push_back(i < 12 ? 0.0 : 1.0);
  }
  ForestParams p;
  p.n_trees = 1;
  p.bootstrap = false;
  p.min_samples_leaf = 1;
  const Forest f = train_forest(Matrix(20, 1, xs), y, TaskKind::kRegression, p, 1);
  ASSERT_EQ(f.trees[0].nodes.size(), 3U);
  const double t = f.trees[0].nodes[0].threshold;
  EXPECT_GT(t, 11.0);
  EXPECT_LT(t, 12.0);
  double prev = -1;
  for (double x = -5; x <= 25; x += 0.25) {
    const double v = predict(f, {x});
    EXPECT_GE(v, prev);
    EXPECT_EQ(v, x <= t ? 0.0 : 1.0);
    prev = v;
  }
}

TEST(Ols, Examples) {
  const LinearModel m = fit_ols({1, 2, 3}, {1, 3, 2});
  EXPECT_DOUBLE_EQ(m.coefficients[0], 0.5);
  EXPECT_DOUBLE_EQ(m.intercept, 1.0);
  EXPECT_THROW(fit_ols({1, 2}, {1, 2}), LearnError);
  EXPECT_THROW(fit_ols({1, 1, 1}, {1, 2, 3}), LearnError);
}

TEST(Ols, MultipleRegressionRecoversCoefficients) {
  const Data d = regression_data(300, 6);
  const LinearModel m = fit_linear(d.x, d.y);
  EXPECT_NEAR(m.coefficients[0], 2.0, 0.05);
  EXPECT_NEAR(m.coefficients[1], -1.0, 0.05);
  EXPECT_NEAR(m.intercept, 0.0, 0.05);
}

TEST(Logistic, GradientMatchesFiniteDifferences) {
  const Data d = classification_data(100, 21);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  for (double l2: {0.0, 1.0}) {
    for (int trial = 0; trial < 5; ++trial) {
      std::vector<double> theta(4);
      for (double &t: theta)
        t = u(rng);
      const auto g = logistic_gradient(d.x, d.y, theta, l2);
      for (std::size_t k = 0; k < theta.size(); ++k) {
        const double h = 1e-5 * std::max(1.0, std::abs(theta[k]));
        auto plus = theta, minus = theta;
        plus[k] += h;
        minus[k] -= h;
        const double fd = (logistic_loss(d.x, d.y, plus, l2) - logistic_loss(d.x, d.y, minus, l2))
                          / (2 * h);
        EXPECT_LE(std::abs(fd - g[k]), 1e-6 * std::max(1.0, std::abs(g[k])))
            << "k=" << k << " l2=" << l2;
      }
    }
  }
}

TEST(Logistic, FitReachesStationaryPoint) {
  const Data d = classification_data(250, 13);
  const LinearModel m = fit_logistic(d.x, d.y);
  EXPECT_TRUE(m.converged);
  std::vector<double> theta = m.coefficients;
  theta.push_back(m.intercept);
  for (double g: logistic_gradient(d.x, d.y, theta, 1.0))
    EXPECT_LT(std::abs(g), 1e-5);
  EXPECT_GT(m.coefficients[0], m.coefficients[2]);
}

TEST(Ols, ExactLineHasZeroResidualVariance) {
  const LinearModel m = fit_ols({1, 2, 3, 4}, {2, 4, 6, 8});
  EXPECT_NEAR(m.coefficients[0], 2.0, 1e-12);
  EXPECT_NEAR(m.intercept, 0.0, 1e-12);
  EXPECT_NEAR(m.residual_variance, 0.0, 1e-20);
}

TEST(Logistic, HeavyPenaltyShrinksCoefficientsToZero) {
  const Data d = classification_data(120, 4);
  double prev = std::numeric_limits<double>::infinity();
  for (double l2: {1.0, 1e2, 1e4, 1e6}) {
    LogisticOptions opts;
    opts.l2 = l2;
    const LinearModel m = fit_logistic(d.x, d.y, opts);
    double norm = 0;
    for (double w: m.coefficients)
      norm += w * w;
    norm = std::sqrt(norm);
    EXPECT_LT(norm, prev) << "l2=" << l2;
    prev = norm;
  }
  EXPECT_LT(prev, 1e-3);
}

TEST(Logistic, SymmetricSeparableData) {
  // Invariant under x -> -x with labels swapped, so the intercept vanishes.
  Matrix x(6, 1, {-3, -2, -1, 1, 2, 3});
  LogisticOptions opts;
  opts.l2 = 0.1;
  const LinearModel m = fit_logistic(x, {0, 0, 0, 1, 1, 1}, opts);
  EXPECT_TRUE(m.converged);
  EXPECT_NEAR(m.intercept, 0.0, 1e-9);
  EXPECT_GT(m.coefficients[0], 0.0);
}

TEST(Logistic, SeparableDataWithoutPenaltyWarns) {
  Matrix x(4, 1, {0, 1, 2, 3});
  LogisticOptions opts;
  opts.l2 = 0.0;
  opts.max_iter = 20;
  const LinearModel m = fit_logistic(x, {0, 0, 1, 1}, opts);
  const double p_hi = predict(m, {3.0});
  EXPECT_GT(p_hi, 0.99);
  if (!m.converged)
    EXPECT_FALSE(m.warnings.empty());
}

TEST(Model, VariantDispatchAndJson) {
  const Data d = classification_data(80, 2);
  const Model lin = fit_logistic(d.x, d.y);
  const Model rf = train_forest(d.x, d.y, TaskKind::kClassification, small(4), 1);
  for (const Model &m: {lin, rf}) {
    EXPECT_EQ(feature_count(m), 3U);
    const Model back = model_from_json(nlohmann::json::parse(to_json(m).dump()));
    EXPECT_EQ(model_hash(back), model_hash(m));
    EXPECT_DOUBLE_EQ(predict(back, d.x.row(0)), predict(m, d.x.row(0)));
    const auto imp = model_importances(m, d.x);
    EXPECT_NEAR(std::accumulate(imp.begin(), imp.end(), 0.0), 1.0, 1e-9);
  }
}

}  // namespace
}  // namespace llm4sd::learn
