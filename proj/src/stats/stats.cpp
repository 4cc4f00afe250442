//
// Project llm4sd - Copyright 2026 The llm4sd Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "llm4sd/stats/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <cstdio>
#include <numeric>

#include "llm4sd/learners/linear.hpp"
#include "llm4sd/util/csv.hpp"

namespace llm4sd::stats {

// ---- special functions --------------------------------------------------

double normal_sf(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

namespace {

// Continued fraction for I_x(a, b), modified Lentz.
double beta_cf(double a, double b, double x) {
  constexpr double kTiny = 1e-300;
  constexpr double kEps = 1e-16;
  const double qab = a + b, qap = a + 1, qam = a - 1;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny)
    d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= 100000; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny)
      d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny)
      c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny)
      d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny)
      c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps)
      return h;
  }
  return h;
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
  if (!(a > 0) || !(b > 0))
    throw StatsError("incomplete_beta: a and b must be positive");
  if (!(x >= 0 && x <= 1))
    throw StatsError("incomplete_beta: x outside [0, 1]");
  if (x == 0 || x == 1)
    return x;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b)
                           + a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1) / (a + b + 2))
    return front * beta_cf(a, b, x) / a;
  return 1.0 - front * beta_cf(b, a, 1.0 - x) / b;
}

double student_t_sf(double t, double dof) {
  if (!(dof > 0))
    throw StatsError("student_t_sf: dof must be positive");
  if (std::isnan(t))
    throw StatsError("student_t_sf: t is NaN");
  if (std::isinf(t))
    return t > 0 ? 0.0 : 1.0;
  const double tail = 0.5 * incomplete_beta(dof / 2, 0.5, dof / (dof + t * t));
  return t > 0 ? tail : 1.0 - tail;
}

// ---- tests --------------------------------------------------------------

std::string_view method_name(Method m) {
  return m == Method::kMannWhitney ? "mwu" : "slope_t";
}

TestResult mann_whitney_u(const std::vector<double> &a, const std::vector<double> &b) {
  if (a.empty() || b.empty())
    throw StatsError("mann_whitney_u: empty sample");
  const std::size_t n1 = a.size(), n2 = b.size(), n = n1 + n2;
  std::vector<std::pair<double, int>> pooled;
  pooled.reserve(n);
  for (double v: a)
    pooled.emplace_back(v, 0);
  for (double v: b)
    pooled.emplace_back(v, 1);
  for (const auto &p: pooled)
    if (std::isnan(p.first))
      throw StatsError("mann_whitney_u: NaN in sample");
  std::sort(pooled.begin(), pooled.end());
  double rank_sum_a = 0.0;
  double tie_term = 0.0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && pooled[j].first == pooled[i].first)
      ++j;
    const double midrank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    const double t = static_cast<double>(j - i);
    tie_term += t * t * t - t;
    for (std::size_t k = i; k < j; ++k)
      if (pooled[k].second == 0)
        rank_sum_a += midrank;
    i = j;
  }
  TestResult r;
  r.method = Method::kMannWhitney;
  r.n1 = n1;
  r.n2 = n2;
  const double dn1 = static_cast<double>(n1), dn2 = static_cast<double>(n2);
  const double dn = static_cast<double>(n);
  r.statistic = rank_sum_a - dn1 * (dn1 + 1) / 2;
  r.tie_correction_applied = tie_term > 0;
  const double mu = dn1 * dn2 / 2;
  const double var = dn1 * dn2 / 12.0 * ((dn + 1) - tie_term / (dn * (dn - 1)));
  if (n < 2 || !(var > 0)) {
    r.degenerate = true;
    r.p_value = 1.0;
    return r;
  }
  const double z = std::max(0.0, std::abs(r.statistic - mu) - 0.5) / std::sqrt(var);
  r.p_value = std::min(1.0, 2.0 * normal_sf(z));
  return r;
}

TestResult slope_t_test(const std::vector<double> &x, const std::vector<double> &y) {
  learn::LinearModel m;
  try {
    m = learn::fit_ols(x, y);
  } catch (const learn::LearnError &e) {
    throw StatsError(std::string("slope_t_test: ") + e.what());
  }
  TestResult r;
  r.method = Method::kSlopeT;
  r.n1 = x.size();
  const double slope = m.coefficients[0];
  if (m.residual_variance < 1e-12) {
    r.exact_fit = true;
    r.p_value = slope == 0.0 ? 1.0 : 0.0;
    r.statistic = slope == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), slope);
    return r;
  }
  r.statistic = slope / m.standard_errors[0];
  r.p_value = std::min(1.0, 2.0 * student_t_sf(std::abs(r.statistic),
                                               static_cast<double>(x.size() - 2)));
  return r;
}

// ---- metrics ------------------------------------------------------------

double auc_roc(const std::vector<double> &scores, const std::vector<int> &labels) {
  if (scores.size() != labels.size())
    throw StatsError("auc_roc: scores and labels differ in length");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t i, std::size_t j) { return scores[i] < scores[j]; });
  double pos = 0, neg = 0, wins = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    double p = 0, q = 0;
    for (; j < order.size() && scores[order[j]] == scores[order[i]]; ++j) {
      const int l = labels[order[j]];
      if (l != 0 && l != 1)
        throw StatsError("auc_roc: labels must be 0 or 1");
      (l == 1 ? p : q) += 1;
    }
    // Positives in this group beat every negative scored lower and tie with
    // the negatives in the group.
    wins += p * neg + 0.5 * p * q;
    pos += p;
    neg += q;
    i = j;
  }
  if (pos == 0 || neg == 0)
    throw StatsError("auc_roc: both classes must be present");
  return wins / (pos * neg);
}

namespace {

void check_pair(const std::vector<double> &pred, const std::vector<double> &truth,
                const char *fn) {
  if (pred.size() != truth.size())
    throw StatsError(std::string(fn) + ": length mismatch");
  if (pred.empty())
    throw StatsError(std::string(fn) + ": empty input");
}

}  // namespace

double rmse(const std::vector<double> &pred, const std::vector<double> &truth) {
  check_pair(pred, truth, "rmse");
  double s = 0;
  for (std::size_t i = 0; i < pred.size(); ++i)
    s += (pred[i] - truth[i]) * (pred[i] - truth[i]);
  return std::sqrt(s / static_cast<double>(pred.size()));
}

double mae(const std::vector<double> &pred, const std::vector<double> &truth) {
  check_pair(pred, truth, "mae");
  double s = 0;
  for (std::size_t i = 0; i < pred.size(); ++i)
    s += std::abs(pred[i] - truth[i]);
  return s / static_cast<double>(pred.size());
}

// ---- verdicts -----------------------------------------------------------

std::string_view category_name(Category c) {
  switch (c) {
  case Category::kSignificantSupported:
    return "significant_supported";
  case Category::kSignificantNotFound:
    return "significant_not_found";
  case Category::kInsignificant:
    return "insignificant";
  case Category::kSignificantUnannotated:
    return "significant_unannotated";
  }
  return "insignificant";
}

RuleVerdict classify_rule(std::string rule_id, const TestResult &test,
                          std::optional<bool> literature_supported, std::string citation_note) {
  RuleVerdict v;
  v.rule_id = std::move(rule_id);
  v.test = test;
  v.significant = test.p_value < kSignificance;
  v.literature_supported = literature_supported;
  v.citation_note = std::move(citation_note);
  if (!v.significant)
    v.category = Category::kInsignificant;
  else if (!literature_supported)
    v.category = Category::kSignificantUnannotated;
  else
    v.category = *literature_supported ? Category::kSignificantSupported
                                       : Category::kSignificantNotFound;
  return v;
}

std::vector<std::pair<std::string, Annotation>> parse_annotations(std::string_view csv) {
  const util::CsvTable t = util::parse_csv(csv);
  const int id = t.column("rule_id"), sup = t.column("supported"),
            note = t.column("citation_note");
  if (id < 0 || sup < 0)
    throw StatsError("annotations: header must name rule_id and supported");
  std::vector<std::pair<std::string, Annotation>> out;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    std::string flag = t.rows[r][static_cast<std::size_t>(sup)];
    std::transform(flag.begin(), flag.end(), flag.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    Annotation a;
    if (flag == "1" || flag == "true" || flag == "yes")
      a.supported = true;
    else if (flag == "0" || flag == "false" || flag == "no")
      a.supported = false;
    else
      throw StatsError("annotations line " + std::to_string(t.lines[r])
                       + ": supported must be 1/0/true/false/yes/no");
    if (note >= 0)
      a.citation_note = t.rows[r][static_cast<std::size_t>(note)];
    out.emplace_back(t.rows[r][static_cast<std::size_t>(id)], std::move(a));
  }
  return out;
}

std::string verdicts_to_csv(const std::vector<RuleVerdict> &verdicts) {
  std::string out = util::csv_line({"rule_id", "method", "statistic", "p_value", "n1", "n2",
                                    "significant", "supported", "category", "citation_note"});
  auto num = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return std::string(buf);
  };
  for (const RuleVerdict &v: verdicts) {
    out += util::csv_line({v.rule_id, std::string(method_name(v.test.method)),
                           num(v.test.statistic), num(v.test.p_value),
                           std::to_string(v.test.n1), std::to_string(v.test.n2),
                           v.significant ? "1" : "0",
                           v.literature_supported ? (*v.literature_supported ? "1" : "0") : "",
                           std::string(category_name(v.category)), v.citation_note});
  }
  return out;
}

}  // namespace llm4sd::stats
