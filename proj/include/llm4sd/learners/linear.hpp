//
// Project llm4sd - Copyright 2026 The llm4sd Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef LLM4SD_LEARNERS_LINEAR_HPP_
#define LLM4SD_LEARNERS_LINEAR_HPP_

#include <string>
#include <vector>

#include <json.hpp>

#include "llm4sd/learners/forest.hpp"

namespace llm4sd::learn {

enum class LinearKind { kOls, kLogistic };

struct LinearModel {
  LinearKind kind = LinearKind::kOls;
  std::vector<double> coefficients;
  double intercept = 0.0;
  // OLS: residual variance with n - p - 1 degrees of freedom, and the
  // standard error of each coefficient (simple regression only).
  double residual_variance = 0.0;
  std::vector<double> standard_errors;
  std::size_t n = 0;
  // Logistic fit diagnostics.
  int iterations = 0;
  bool converged = true;
  double l2 = 0.0;
  std::vector<std::string> warnings;

  friend bool operator==(const LinearModel &a, const LinearModel &b) {
    return a.kind == b.kind && a.coefficients == b.coefficients && a.intercept == b.intercept
           && a.residual_variance == b.residual_variance && a.n == b.n
           && a.iterations == b.iterations && a.converged == b.converged && a.l2 == b.l2;
  }
};

/// Simple regression y = a + b x. Requires n >= 3 and var(x) > 0.
LinearModel fit_ols(const std::vector<double> &x, const std::vector<double> &y);

/// Multiple regression by least squares (column-pivoted QR); rank-deficient
/// columns get coefficient 0.
LinearModel fit_linear(const Matrix &x, const std::vector<double> &y);

struct LogisticOptions {
  double l2 = 1.0;
  double tolerance = 1e-6;
  int max_iter = 100;
};

/// Penalized maximum likelihood by iteratively reweighted least squares. The
/// intercept is not penalized. On non-convergence the last iterate is
/// returned with converged = false and a warning.
LinearModel fit_logistic(const Matrix &x, const std::vector<double> &y,
                         const LogisticOptions &opts = {});

/// Penalized negative log-likelihood and its gradient at parameters
/// theta = (w_1..w_r, b).
double logistic_loss(const Matrix &x, const std::vector<double> &y,
                     const std::vector<double> &theta, double l2);
std::vector<double> logistic_gradient(const Matrix &x, const std::vector<double> &y,
                                      const std::vector<double> &theta, double l2);

/// Affine score for OLS, sigmoid of it for logistic.
double predict(const LinearModel &m, const std::vector<double> &x);

nlohmann::json to_json(const LinearModel &m);
LinearModel linear_from_json(const nlohmann::json &j);

}  // namespace llm4sd::learn

#endif  // LLM4SD_LEARNERS_LINEAR_HPP_
