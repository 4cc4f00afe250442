//
// Project llm4sd - Copyright 2026 The llm4sd Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef LLM4SD_LEARNERS_MODEL_HPP_
#define LLM4SD_LEARNERS_MODEL_HPP_

#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "llm4sd/learners/forest.hpp"
#include "llm4sd/learners/linear.hpp"

namespace llm4sd::learn {

using Model = std::variant<Forest, LinearModel>;

std::size_t feature_count(const Model &m);
double predict(const Model &m, const std::vector<double> &x);

/// Forest importances; for linear models |coefficient| x std(feature)
/// normalized to sum 1, using the supplied training matrix.
std::vector<double> model_importances(const Model &m, const Matrix &train_x);

nlohmann::json to_json(const Model &m);
Model model_from_json(const nlohmann::json &j);

/// SHA-256 of the compact JSON serialization.
std::string model_hash(const Model &m);

}  // namespace llm4sd::learn

#endif  // LLM4SD_LEARNERS_MODEL_HPP_
