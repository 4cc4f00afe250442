//
// Project llm4sd - Copyright 2026 The llm4sd Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef LLM4SD_STATS_STATS_HPP_
#define LLM4SD_STATS_STATS_HPP_

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace llm4sd::stats {

class StatsError: public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

// ---- special functions --------------------------------------------------

/// Upper tail of the standard normal, P(Z > z).
double normal_sf(double z);

/// Regularized incomplete beta I_x(a, b), a, b > 0, x in [0, 1].
double incomplete_beta(double a, double b, double x);

/// Upper tail of Student's t with `dof` degrees of freedom, P(T > t).
double student_t_sf(double t, double dof);

// ---- tests --------------------------------------------------------------

enum class Method { kMannWhitney, kSlopeT };
std::string_view method_name(Method m);

struct TestResult {
  Method method = Method::kMannWhitney;
  double statistic = 0.0;  // U of the first sample, or t
  double p_value = 1.0;    // two-sided
  std::size_t n1 = 0;
  std::size_t n2 = 0;      // second sample size; 0 for the slope test
  bool tie_correction_applied = false;
  bool degenerate = false; // all values tied: p = 1
  bool exact_fit = false;  // zero residuals: p = 0
};

/// Midrank U for `a`, normal approximation with tie and continuity
/// corrections.
TestResult mann_whitney_u(const std::vector<double> &a, const std::vector<double> &b);

/// t test of the OLS slope of y on x with n - 2 degrees of freedom.
TestResult slope_t_test(const std::vector<double> &x, const std::vector<double> &y);

// ---- metrics ------------------------------------------------------------

/// Probability a random positive outscores a random negative, ties count 1/2.
double auc_roc(const std::vector<double> &scores, const std::vector<int> &labels);
double rmse(const std::vector<double> &pred, const std::vector<double> &truth);
double mae(const std::vector<double> &pred, const std::vector<double> &truth);

// ---- rule verdicts ------------------------------------------------------

inline constexpr double kSignificance = 0.05;

enum class Category {
  kSignificantSupported,
  kSignificantNotFound,
  kInsignificant,
  // Significant, but no literature annotation was supplied.
  kSignificantUnannotated,
};
std::string_view category_name(Category c);

struct RuleVerdict {
  std::string rule_id;
  TestResult test;
  bool significant = false;
  std::optional<bool> literature_supported;
  std::string citation_note;
  Category category = Category::kInsignificant;
};

RuleVerdict classify_rule(std::string rule_id, const TestResult &test,
                          std::optional<bool> literature_supported,
                          std::string citation_note = {});

struct Annotation {
  bool supported = false;
  std::string citation_note;
};

/// CSV with header `rule_id,supported,citation_note`; supported is one of
/// 1/0/true/false/yes/no.
std::vector<std::pair<std::string, Annotation>> parse_annotations(std::string_view csv);

std::string verdicts_to_csv(const std::vector<RuleVerdict> &verdicts);

}  // namespace llm4sd::stats

#endif  // LLM4SD_STATS_STATS_HPP_
