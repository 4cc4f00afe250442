//
// Project llm4sd - Copyright 2026 The llm4sd Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "llm4sd/learners/model.hpp"

#include <cmath>
#include <numeric>

#include "llm4sd/util/hash.hpp"

namespace llm4sd::learn {

std::size_t feature_count(const Model &m) {
  if (const auto *f = std::get_if<Forest>(&m))
    return f->feature_count;
  return std::get<LinearModel>(m).coefficients.size();
}

double predict(const Model &m, const std::vector<double> &x) {
  return std::visit([&](const auto &model) { return predict(model, x); }, m);
}

std::vector<double> model_importances(const Model &m, const Matrix &train_x) {
  if (const auto *f = std::get_if<Forest>(&m))
    return importances(*f);
  const LinearModel &lm = std::get<LinearModel>(m);
  const std::size_t r = lm.coefficients.size();
  if (train_x.cols != r)
    throw LearnError("model_importances: training matrix has wrong width");
  std::vector<double> out(r, 0.0);
  const double n = static_cast<double>(train_x.rows);
  for (std::size_t j = 0; j < r && train_x.rows > 0; ++j) {
    double mean = 0, var = 0;
    for (std::size_t i = 0; i < train_x.rows; ++i)
      mean += train_x(i, j);
    mean /= n;
    for (std::size_t i = 0; i < train_x.rows; ++i)
      var += (train_x(i, j) - mean) * (train_x(i, j) - mean);
    out[j] = std::abs(lm.coefficients[j]) * std::sqrt(var / n);
  }
  const double total = std::accumulate(out.begin(), out.end(), 0.0);
  if (total > 0)
    for (double &v: out)
      v /= total;
  return out;
}

nlohmann::json to_json(const Model &m) {
  return std::visit([](const auto &model) { return to_json(model); }, m);
}

Model model_from_json(const nlohmann::json &j) {
  const std::string format = j.value("format", "");
  if (format == "llm4sd-forest")
    return forest_from_json(j);
  if (format == "llm4sd-linear")
    return linear_from_json(j);
  throw LearnError("model json: unknown format '" + format + "'");
}

std::string model_hash(const Model &m) { return util::sha256_hex(to_json(m).dump()); }

}  // namespace llm4sd::learn
