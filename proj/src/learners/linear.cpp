//
// Project llm4sd - Copyright 2026 The llm4sd Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "llm4sd/learners/linear.hpp"

#include <Eigen/Dense>

#include <cmath>

namespace llm4sd::learn {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Design matrix with a trailing column of ones.
MatrixXd augmented(const Matrix &x) {
  MatrixXd a(static_cast<Eigen::Index>(x.rows), static_cast<Eigen::Index>(x.cols + 1));
  for (std::size_t i = 0; i < x.rows; ++i) {
    for (std::size_t j = 0; j < x.cols; ++j)
      a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = x(i, j);
    a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(x.cols)) = 1.0;
  }
  return a;
}

double softplus(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

double sigmoid(double z) {
  if (z >= 0)
    return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double loss_at(const MatrixXd &a, const VectorXd &y, const VectorXd &theta, double l2) {
  const VectorXd z = a * theta;
  double s = 0;
  for (Eigen::Index i = 0; i < z.size(); ++i)
    s += softplus(z(i)) - y(i) * z(i);
  const Eigen::Index r = theta.size() - 1;
  return s + 0.5 * l2 * theta.head(r).squaredNorm();
}

VectorXd gradient_at(const MatrixXd &a, const VectorXd &y, const VectorXd &theta, double l2) {
  const VectorXd z = a * theta;
  VectorXd resid(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i)
    resid(i) = sigmoid(z(i)) - y(i);
  VectorXd g = a.transpose() * resid;
  const Eigen::Index r = theta.size() - 1;
  g.head(r) += l2 * theta.head(r);
  return g;
}

void check_labels(const Matrix &x, const std::vector<double> &y) {
  if (x.rows == 0)
    throw LearnError("fit_logistic: empty matrix");
  if (x.rows != y.size())
    throw LearnError("fit_logistic: rows and labels differ in length");
  for (double v: y)
    if (v != 0.0 && v != 1.0)
      throw LearnError("fit_logistic: labels must be 0 or 1");
}

VectorXd to_eigen(const std::vector<double> &v) {
  return Eigen::Map<const VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

LinearModel fit_ols(const std::vector<double> &x, const std::vector<double> &y) {
  if (x.size() != y.size())
    throw LearnError("fit_ols: x and y differ in length");
  const std::size_t n = x.size();
  if (n < 3)
    throw LearnError("fit_ols: need at least 3 points, got " + std::to_string(n));
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0))
    throw LearnError("fit_ols: zero variance in x");
  LinearModel m;
  m.kind = LinearKind::kOls;
  m.n = n;
  const double slope = sxy / sxx;
  m.coefficients = {slope};
  m.intercept = my - slope * mx;
  double sse = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - m.intercept - slope * x[i];
    sse += r * r;
  }
  m.residual_variance = sse / static_cast<double>(n - 2);
  m.standard_errors = {std::sqrt(m.residual_variance / sxx)};
  return m;
}

LinearModel fit_linear(const Matrix &x, const std::vector<double> &y) {
  if (x.rows != y.size())
    throw LearnError("fit_linear: rows and targets differ in length");
  if (x.rows <= x.cols + 1)
    throw LearnError("fit_linear: need more rows than parameters");
  const MatrixXd a = augmented(x);
  const VectorXd b = to_eigen(y);
  Eigen::ColPivHouseholderQR<MatrixXd> qr(a);
  const VectorXd theta = qr.solve(b);
  LinearModel m;
  m.kind = LinearKind::kOls;
  m.n = x.rows;
  m.coefficients.assign(theta.data(), theta.data() + x.cols);
  m.intercept = theta(static_cast<Eigen::Index>(x.cols));
  for (double &c: m.coefficients)
    if (!std::isfinite(c))
      c = 0.0;
  if (qr.rank() < a.cols())
    m.warnings.push_back("design matrix is rank deficient");
  const double dof = static_cast<double>(x.rows) - static_cast<double>(qr.rank());
  m.residual_variance = (a * theta - b).squaredNorm() / std::max(1.0, dof);
  return m;
}

double logistic_loss(const Matrix &x, const std::vector<double> &y,
                     const std::vector<double> &theta, double l2) {
  check_labels(x, y);
  if (theta.size() != x.cols + 1)
    throw LearnError("logistic_loss: theta has wrong length");
  return loss_at(augmented(x), to_eigen(y), to_eigen(theta), l2);
}

std::vector<double> logistic_gradient(const Matrix &x, const std::vector<double> &y,
                                      const std::vector<double> &theta, double l2) {
  check_labels(x, y);
  if (theta.size() != x.cols + 1)
    throw LearnError("logistic_gradient: theta has wrong length");
  const VectorXd g = gradient_at(augmented(x), to_eigen(y), to_eigen(theta), l2);
  return {g.data(), g.data() + g.size()};
}

LinearModel fit_logistic(const Matrix &x, const std::vector<double> &y,
                         const LogisticOptions &opts) {
  check_labels(x, y);
  if (opts.l2 < 0)
    throw LearnError("fit_logistic: l2 must be non-negative");
  const MatrixXd a = augmented(x);
  const VectorXd yy = to_eigen(y);
  const Eigen::Index p = a.cols();
  VectorXd theta = VectorXd::Zero(p);
  VectorXd penalty = VectorXd::Constant(p, opts.l2);
  penalty(p - 1) = 0.0;

  LinearModel m;
  m.kind = LinearKind::kLogistic;
  m.n = x.rows;
  m.l2 = opts.l2;
  m.converged = false;
  double loss = loss_at(a, yy, theta, opts.l2);
  int it = 0;
  for (; it < opts.max_iter; ++it) {
    const VectorXd g = gradient_at(a, yy, theta, opts.l2);
    if (g.norm() < opts.tolerance) {
      m.converged = true;
      break;
    }
    const VectorXd z = a * theta;
    VectorXd w(z.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) {
      const double s = sigmoid(z(i));
      w(i) = std::max(s * (1 - s), 1e-12);
    }
    MatrixXd h = a.transpose() * w.asDiagonal() * a;
    h.diagonal() += penalty;
    // A small ridge keeps the solve defined when the data separate and l2 = 0.
    h.diagonal().array() += 1e-10 * std::max(1.0, h.diagonal().maxCoeff());
    const VectorXd step = h.ldlt().solve(g);
    double t = 1.0;
    bool improved = false;
    for (int half = 0; half < 40; ++half, t *= 0.5) {
      const VectorXd cand = theta - t * step;
      const double l = loss_at(a, yy, cand, opts.l2);
      if (l <= loss) {
        theta = cand;
        improved = l < loss;
        loss = l;
        break;
      }
    }
    if (!improved) {
      // No decrease possible at working precision.
      m.converged = gradient_at(a, yy, theta, opts.l2).norm() < opts.tolerance;
      ++it;
      break;
    }
  }
  m.iterations = it;
  m.coefficients.assign(theta.data(), theta.data() + p - 1);
  m.intercept = theta(p - 1);
  if (!m.converged)
    m.warnings.push_back("logistic fit did not converge in " + std::to_string(it)
                         + " iterations");
  return m;
}

double predict(const LinearModel &m, const std::vector<double> &x) {
  if (x.size() != m.coefficients.size())
    throw LearnError("predict: expected " + std::to_string(m.coefficients.size())
                     + " features, got " + std::to_string(x.size()));
  double z = m.intercept;
  for (std::size_t j = 0; j < x.size(); ++j)
    z += m.coefficients[j] * x[j];
  return m.kind == LinearKind::kLogistic ? sigmoid(z) : z;
}

nlohmann::json to_json(const LinearModel &m) {
  return {
      {"format", "llm4sd-linear"},
      {"version", 1},
      {"kind", m.kind == LinearKind::kOls ? "ols" : "logistic"},
      {"coefficients", m.coefficients},
      {"intercept", m.intercept},
      {"residual_variance", m.residual_variance},
      {"n", m.n},
      {"iterations", m.iterations},
      {"converged", m.converged},
      {"l2", m.l2},
  };
}

LinearModel linear_from_json(const nlohmann::json &j) {
  try {
    if (j.at("format") != "llm4sd-linear" || j.at("version") != 1)
      throw LearnError("linear json: unsupported format");
    LinearModel m;
    const std::string kind = j.at("kind");
    if (kind != "ols" && kind != "logistic")
      throw LearnError("linear json: unknown kind '" + kind + "'");
    m.kind = kind == "ols" ? LinearKind::kOls : LinearKind::kLogistic;
    m.coefficients = j.at("coefficients").get<std::vector<double>>();
    m.intercept = j.at("intercept");
    m.residual_variance = j.at("residual_variance");
    m.n = j.at("n");
    m.iterations = j.at("iterations");
    m.converged = j.at("converged");
    m.l2 = j.at("l2");
    return m;
  } catch (const nlohmann::json::exception &e) {
    throw LearnError(std::string("linear json: ") + e.what());
  }
}

}  // namespace llm4sd::learn
