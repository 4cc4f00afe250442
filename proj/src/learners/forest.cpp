//
// Project llm4sd - Copyright 2026 The llm4sd Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "llm4sd/learners/forest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <thread>

#include "llm4sd/learners/rng.hpp"

namespace llm4sd::learn {

std::string_view task_kind_name(TaskKind k) {
  return k == TaskKind::kClassification ? "classification" : "regression";
}

TaskKind task_kind_from_name(std::string_view name) {
  if (name == "classification")
    return TaskKind::kClassification;
  if (name == "regression")
    return TaskKind::kRegression;
  throw LearnError("unknown task kind '" + std::string(name) + "'");
}

Matrix::Matrix(std::size_t r, std::size_t c, std::vector<double> v)
    : rows(r), cols(c), values(std::move(v)) {
  if (values.size() != rows * cols)
    throw LearnError("matrix: value count does not match shape");
}

std::vector<double> Matrix::row(std::size_t r) const {
  return {values.begin() + static_cast<std::ptrdiff_t>(r * cols),
          values.begin() + static_cast<std::ptrdiff_t>((r + 1) * cols)};
}

namespace {

class TreeBuilder {
public:
  TreeBuilder(const Matrix &x, const std::vector<double> &y, TaskKind kind, int min_leaf,
              int max_depth, int mtry, CounterRng &rng)
      : x_(x), y_(y), kind_(kind), min_leaf_(static_cast<std::size_t>(min_leaf)),
        max_depth_(max_depth), mtry_(static_cast<std::size_t>(mtry)), rng_(rng) {
    tree_.raw_importance.assign(x.cols, 0.0);
    features_.resize(x.cols);
    std::iota(features_.begin(), features_.end(), 0);
  }

  Tree build(std::vector<std::size_t> idx) {
    grow(idx, 0);
    return std::move(tree_);
  }

private:
  struct Split {
    int feature = -1;
    double threshold = 0.0;
    double gain = 0.0;
  };

  // Sample-weighted impurity: n * gini, or the sum of squared deviations.
  double impurity(const std::vector<std::size_t> &idx) const {
    const double n = static_cast<double>(idx.size());
    if (kind_ == TaskKind::kClassification) {
      double pos = 0;
      for (std::size_t i: idx)
        pos += y_[i];
      const double p = pos / n;
      return n * (1.0 - p * p - (1 - p) * (1 - p));
    }
    double mean = 0;
    for (std::size_t i: idx)
      mean += y_[i];
    mean /= n;
    double sse = 0;
    for (std::size_t i: idx)
      sse += (y_[i] - mean) * (y_[i] - mean);
    return sse;
  }

  std::vector<double> leaf_value(const std::vector<std::size_t> &idx) const {
    double s = 0;
    for (std::size_t i: idx)
      s += y_[i];
    const double m = s / static_cast<double>(idx.size());
    if (kind_ == TaskKind::kClassification)
      return {1.0 - m, m};
    return {m};
  }

  static double child_impurity(TaskKind kind, double n, double sum, double sumsq) {
    if (kind == TaskKind::kClassification) {
      const double p = sum / n;
      return n * (1.0 - p * p - (1 - p) * (1 - p));
    }
    return std::max(0.0, sumsq - sum * sum / n);
  }

  Split best_split(const std::vector<std::size_t> &idx, double parent) {
    // Candidate features: a uniform sample of size mtry, scanned in index order.
    for (std::size_t k = 0; k < mtry_ && k + 1 < features_.size(); ++k) {
      const std::size_t j = k + rng_.bounded(features_.size() - k);
      std::swap(features_[k], features_[j]);
    }
    std::vector<int> candidates(features_.begin(),
                                features_.begin() + static_cast<std::ptrdiff_t>(mtry_));
    std::sort(candidates.begin(), candidates.end());

    const std::size_t n = idx.size();
    double total = 0, total_sq = 0;
    for (std::size_t i: idx) {
      total += y_[i];
      total_sq += y_[i] * y_[i];
    }
    Split best;
    const double min_gain = 1e-12 * std::max(1.0, parent);
    std::vector<std::pair<double, double>> col(n);
    for (int f: candidates) {
      for (std::size_t k = 0; k < n; ++k)
        col[k] = {x_(idx[k], static_cast<std::size_t>(f)), y_[idx[k]]};
      std::sort(col.begin(), col.end());
      double sum = 0, sumsq = 0;
      for (std::size_t k = 1; k < n; ++k) {
        sum += col[k - 1].second;
        sumsq += col[k - 1].second * col[k - 1].second;
        if (k < min_leaf_ || n - k < min_leaf_ || col[k - 1].first == col[k].first)
          continue;
        const double nl = static_cast<double>(k);
        const double nr = static_cast<double>(n - k);
        const double gain = parent - child_impurity(kind_, nl, sum, sumsq)
                            - child_impurity(kind_, nr, total - sum, total_sq - sumsq);
        if (gain > best.gain + min_gain) {
          const double lo = col[k - 1].first, hi = col[k].first;
          double t = lo + (hi - lo) / 2;
          if (!(t < hi))
            t = lo;
          best = {f, t, gain};
        }
      }
    }
    return best;
  }

  int grow(const std::vector<std::size_t> &idx, int depth) {
    const int id = static_cast<int>(tree_.nodes.size());
    tree_.nodes.push_back({});
    tree_.nodes[id].samples = idx.size();
    const double parent = impurity(idx);
    const bool can_split = idx.size() >= 2 * std::max<std::size_t>(min_leaf_, 1)
                           && (max_depth_ <= 0 || depth < max_depth_) && parent > 1e-12
                           && mtry_ > 0;
    Split s;
    if (can_split)
      s = best_split(idx, parent);
    if (s.feature < 0) {
      tree_.nodes[id].value = leaf_value(idx);
      return id;
    }
    std::vector<std::size_t> left, right;
    for (std::size_t i: idx)
      (x_(i, static_cast<std::size_t>(s.feature)) <= s.threshold ? left : right).push_back(i);
    tree_.raw_importance[static_cast<std::size_t>(s.feature)] += s.gain;
    tree_.nodes[id].feature = s.feature;
    tree_.nodes[id].threshold = s.threshold;
    const int l = grow(left, depth + 1);
    const int r = grow(right, depth + 1);
    tree_.nodes[id].left = l;
    tree_.nodes[id].right = r;
    return id;
  }

  const Matrix &x_;
  const std::vector<double> &y_;
  TaskKind kind_;
  std::size_t min_leaf_;
  int max_depth_;
  std::size_t mtry_;
  CounterRng &rng_;
  std::vector<int> features_;
  Tree tree_;
};

const TreeNode &leaf_for(const Tree &t, const std::vector<double> &x) {
  int id = 0;
  while (!t.nodes[static_cast<std::size_t>(id)].is_leaf()) {
    const TreeNode &n = t.nodes[static_cast<std::size_t>(id)];
    id = x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
  }
  return t.nodes[static_cast<std::size_t>(id)];
}

}  // namespace

Forest train_forest(const Matrix &x, const std::vector<double> &y, TaskKind kind,
                    const ForestParams &params, std::uint64_t seed) {
  if (x.rows == 0)
    throw LearnError("train_forest: empty matrix");
  if (x.rows != y.size())
    throw LearnError("train_forest: " + std::to_string(x.rows) + " rows but "
                     + std::to_string(y.size()) + " labels");
  if (x.rows < 2)
    throw LearnError("train_forest: need at least 2 rows");
  if (params.n_trees < 1)
    throw LearnError("train_forest: n_trees must be positive");
  for (double v: x.values)
    if (!std::isfinite(v))
      throw LearnError("train_forest: non-finite feature value");

  Forest f;
  f.kind = kind;
  f.params = params;
  f.seed = seed;
  f.feature_count = x.cols;
  if (kind == TaskKind::kClassification) {
    bool has0 = false, has1 = false;
    for (double v: y) {
      if (v != 0.0 && v != 1.0)
        throw LearnError("train_forest: classification labels must be 0 or 1");
      (v == 1.0 ? has1 : has0) = true;
    }
    if (!has0 || !has1)
      f.warnings.push_back("single class in training labels; forest is constant");
  }

  const int min_leaf = params.min_samples_leaf > 0
                           ? params.min_samples_leaf
                           : (kind == TaskKind::kClassification ? 1 : 5);
  const double r = static_cast<double>(x.cols);
  int mtry = params.max_features > 0
                 ? params.max_features
                 : static_cast<int>(kind == TaskKind::kClassification ? std::ceil(std::sqrt(r))
                                                                      : std::ceil(r / 3));
  mtry = std::min<int>(mtry, static_cast<int>(x.cols));

  f.trees.resize(static_cast<std::size_t>(params.n_trees));
  auto fit_tree = [&](std::size_t t) {
    CounterRng rng(seed, t);
    std::vector<std::size_t> idx(x.rows);
    if (params.bootstrap)
      for (std::size_t &i: idx)
        i = rng.bounded(x.rows);
    else
      std::iota(idx.begin(), idx.end(), 0);
    f.trees[t] = TreeBuilder(x, y, kind, min_leaf, params.max_depth, mtry, rng).build(idx);
  };

  unsigned workers = params.threads > 0 ? static_cast<unsigned>(params.threads)
                                        : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min<unsigned>(workers, static_cast<unsigned>(params.n_trees));
  if (workers <= 1) {
    for (std::size_t t = 0; t < f.trees.size(); ++t)
      fit_tree(t);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w)
      pool.emplace_back([&, w] {
        for (std::size_t t = w; t < f.trees.size(); t += workers)
          fit_tree(t);
      });
  }
  return f;
}

double predict(const Forest &f, const std::vector<double> &x) {
  if (x.size() != f.feature_count)
    throw LearnError("predict: expected " + std::to_string(f.feature_count)
                     + " features, got " + std::to_string(x.size()));
  if (f.trees.empty())
    throw LearnError("predict: forest has no trees");
  double s = 0;
  for (const Tree &t: f.trees)
    s += leaf_for(t, x).value.back();
  return s / static_cast<double>(f.trees.size());
}

std::vector<double> importances(const Forest &f) {
  std::vector<double> out(f.feature_count, 0.0);
  for (const Tree &t: f.trees) {
    const double total = std::accumulate(t.raw_importance.begin(), t.raw_importance.end(), 0.0);
    if (total <= 0)
      continue;
    for (std::size_t j = 0; j < out.size(); ++j)
      out[j] += t.raw_importance[j] / total;
  }
  const double total = std::accumulate(out.begin(), out.end(), 0.0);
  if (total > 0)
    for (double &v: out)
      v /= total;
  return out;
}

nlohmann::json to_json(const Forest &f) {
  nlohmann::json trees = nlohmann::json::array();
  for (const Tree &t: f.trees) {
    nlohmann::json nodes = nlohmann::json::array();
    for (const TreeNode &n: t.nodes)
      nodes.push_back({n.feature, n.threshold, n.left, n.right, n.value, n.samples});
    trees.push_back({{"nodes", std::move(nodes)}, {"raw_importance", t.raw_importance}});
  }
  return {
      {"format", "llm4sd-forest"},
      {"version", 1},
      {"kind", task_kind_name(f.kind)},
      {"params",
       {{"n_trees", f.params.n_trees},
        {"max_depth", f.params.max_depth},
        {"min_samples_leaf", f.params.min_samples_leaf},
        {"max_features", f.params.max_features},
        {"bootstrap", f.params.bootstrap}}},
      {"seed", f.seed},
      {"feature_count", f.feature_count},
      {"trees", std::move(trees)},
  };
}

Forest forest_from_json(const nlohmann::json &j) {
  try {
    if (j.at("format") != "llm4sd-forest" || j.at("version") != 1)
      throw LearnError("forest json: unsupported format");
    Forest f;
    f.kind = task_kind_from_name(j.at("kind").get<std::string>());
    const nlohmann::json &p = j.at("params");
    f.params.n_trees = p.at("n_trees");
    f.params.max_depth = p.at("max_depth");
    f.params.min_samples_leaf = p.at("min_samples_leaf");
    f.params.max_features = p.at("max_features");
    f.params.bootstrap = p.at("bootstrap");
    f.seed = j.at("seed");
    f.feature_count = j.at("feature_count");
    for (const nlohmann::json &jt: j.at("trees")) {
      Tree t;
      t.raw_importance = jt.at("raw_importance").get<std::vector<double>>();
      for (const nlohmann::json &jn: jt.at("nodes")) {
        TreeNode n;
        n.feature = jn.at(0);
        n.threshold = jn.at(1);
        n.left = jn.at(2);
        n.right = jn.at(3);
        n.value = jn.at(4).get<std::vector<double>>();
        n.samples = jn.at(5);
        t.nodes.push_back(std::move(n));
      }
      const int count = static_cast<int>(t.nodes.size());
      for (const TreeNode &n: t.nodes) {
        if (n.feature >= static_cast<int>(f.feature_count))
          throw LearnError("forest json: feature index out of range");
        if (!n.is_leaf() && (n.left <= 0 || n.left >= count || n.right <= 0 || n.right >= count))
          throw LearnError("forest json: bad child index");
        if (n.is_leaf() && n.value.empty())
          throw LearnError("forest json: leaf without value");
      }
      if (t.nodes.empty())
        throw LearnError("forest json: empty tree");
      f.trees.push_back(std::move(t));
    }
    return f;
  } catch (const nlohmann::json::exception &e) {
    throw LearnError(std::string("forest json: ") + e.what());
  }
}

}  // namespace llm4sd::learn
