//
// Project llm4sd - Copyright 2026 The llm4sd Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef LLM4SD_LEARNERS_FOREST_HPP_
#define LLM4SD_LEARNERS_FOREST_HPP_

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace llm4sd::learn {

class LearnError: public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

enum class TaskKind { kClassification, kRegression };
std::string_view task_kind_name(TaskKind k);
TaskKind task_kind_from_name(std::string_view name);

/// Dense row-major design matrix.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, std::vector<double> v);
  double operator()(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
  std::vector<double> row(std::size_t r) const;
};

struct TreeNode {
  int feature = -1;  // -1 for leaves
  double threshold = 0.0;
  int left = -1;     // x[feature] <= threshold
  int right = -1;
  // Leaf payload: class probabilities {P(0), P(1)} or {mean}.
  std::vector<double> value;
  std::size_t samples = 0;

  bool is_leaf() const { return feature < 0; }
  friend bool operator==(const TreeNode &, const TreeNode &) = default;
};

struct Tree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root
  // Sample-weighted impurity decrease per feature, before normalization.
  std::vector<double> raw_importance;

  friend bool operator==(const Tree &, const Tree &) = default;
};

struct ForestParams {
  int n_trees = 500;
  int max_depth = 0;  // 0 = unlimited
  // 0 picks the task default: 1 for classification, 5 for regression.
  int min_samples_leaf = 0;
  // 0 picks ceil(sqrt(r)) for classification, ceil(r / 3) for regression.
  int max_features = 0;
  bool bootstrap = true;
  int threads = 0;  // 0 = hardware concurrency; results do not depend on it

  friend bool operator==(const ForestParams &, const ForestParams &) = default;
};

struct Forest {
  TaskKind kind = TaskKind::kClassification;
  ForestParams params;
  std::uint64_t seed = 0;
  std::size_t feature_count = 0;
  std::vector<Tree> trees;
  std::vector<std::string> warnings;

  friend bool operator==(const Forest &a, const Forest &b) {
    return a.kind == b.kind && a.params == b.params && a.seed == b.seed
           && a.feature_count == b.feature_count && a.trees == b.trees;
  }
};

/// Classification labels must be 0 or 1.
Forest train_forest(const Matrix &x, const std::vector<double> &y, TaskKind kind,
                    const ForestParams &params, std::uint64_t seed);

/// P(class 1) for classification, mean value for regression.
double predict(const Forest &f, const std::vector<double> &x);

/// Normalized to sum 1, or all zero when no tree has a split.
std::vector<double> importances(const Forest &f);

nlohmann::json to_json(const Forest &f);
Forest forest_from_json(const nlohmann::json &j);

}  // namespace llm4sd::learn

#endif  // LLM4SD_LEARNERS_FOREST_HPP_
