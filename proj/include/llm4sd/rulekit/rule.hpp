//
// Project llm4sd - Copyright 2026 The llm4sd Authors.
// SPDX-License-Identifier: Apache-2.0
//

// Rule expressions and rulesets.
//
// Grammar (whitespace is insignificant between tokens):
//
//   expr    := term (('+' | '-') term)*
//   term    := factor ('/' factor)?
//   factor  := [number '*'] primary | '(' expr ')'
//   primary := 'desc(' name ')' | 'count(' pattern ')' | 'has(' pattern ')'
//
// Pattern arguments may be quoted with '"' or '\''; unquoted arguments run to
// the matching close parenthesis.

#ifndef LLM4SD_RULEKIT_RULE_HPP_
#define LLM4SD_RULEKIT_RULE_HPP_

#include <cstddef>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "llm4sd/molgraph/molecule.hpp"
#include "llm4sd/molgraph/pattern.hpp"

namespace llm4sd::rules {

enum class RuleErrorKind { kGrammar, kUnknownDescriptor, kPattern, kFile };

class RuleError: public std::runtime_error {
public:
  RuleError(RuleErrorKind kind, std::string message,
            std::optional<std::size_t> position = std::nullopt);

  RuleErrorKind kind() const { return kind_; }
  std::optional<std::size_t> position() const { return position_; }

private:
  RuleErrorKind kind_;
  std::optional<std::size_t> position_;
};

enum class ValueKind { kInteger, kReal, kBinary };
std::string_view value_kind_name(ValueKind kind);

class Expr {
public:
  enum class Op { kDesc, kCount, kHas, kScale, kSum, kRatio };

  static Expr desc(std::string name);
  static Expr count(std::string pattern);
  static Expr has(std::string pattern);
  static Expr scale(double coefficient, Expr child);
  static Expr sum(std::vector<Expr> terms);
  static Expr ratio(Expr numerator, Expr denominator);

  Op op() const { return op_; }
  /// Descriptor name or pattern source.
  const std::string &text() const { return text_; }
  double coefficient() const { return coefficient_; }
  const std::vector<Expr> &children() const { return children_; }

  ValueKind value_kind() const;

  friend bool operator==(const Expr &a, const Expr &b);

private:
  Op op_ = Op::kDesc;
  std::string text_;
  double coefficient_ = 1.0;
  std::vector<Expr> children_;
  std::shared_ptr<const mol::Pattern> pattern_;

  friend double evaluate(const Expr &, const mol::Molecule &, std::vector<std::string> *);
};

Expr parse_expr(std::string_view text);

/// Canonical text form; parse_expr(to_string(e)) == e.
std::string to_string(const Expr &e);

/// Ratios with a zero denominator evaluate to 0 and append a warning.
double evaluate(const Expr &e, const mol::Molecule &m,
                std::vector<std::string> *warnings = nullptr);

enum class Provenance { kSynthesized, kInferred, kManual };
std::string_view provenance_name(Provenance p);
std::optional<Provenance> provenance_from_name(std::string_view name);

struct Rule {
  std::string id;
  Provenance provenance = Provenance::kManual;
  std::string source_text;
  // Empty when the prose could not be transcribed; `reason` then says why.
  std::optional<Expr> expr;
  std::string reason;

  bool transcribed() const { return expr.has_value(); }

  friend bool operator==(const Rule &, const Rule &) = default;
};

struct RuleSet {
  std::string task;
  std::vector<Rule> rules;

  /// Rules that become feature columns, in order.
  std::vector<const Rule *> active() const;

  friend bool operator==(const RuleSet &, const RuleSet &) = default;
};

/// Throws RuleError when two rules share an id.
void check_unique_ids(const RuleSet &rs);

/// Line format: `id | provenance | dsl | source_text`, fields escaped with
/// backslash (\|, \\, \n). Untranscribed rules store `!reason` as dsl.
std::string format_ruleset(const RuleSet &rs);
RuleSet parse_ruleset(std::string_view text);
void save_ruleset(const RuleSet &rs, const std::string &path);
RuleSet load_ruleset(const std::string &path);

struct CellWarning {
  std::size_t row;
  std::size_t column;
  std::string message;
};

struct FeatureMatrix {
  std::size_t rows = 0;
  std::vector<std::string> columns;  // rule ids
  std::vector<double> values;        // row-major
  std::vector<std::size_t> row_ids;
  std::vector<CellWarning> warnings;

  std::size_t cols() const { return columns.size(); }
  double at(std::size_t r, std::size_t c) const { return values[r * columns.size() + c]; }
  std::vector<double> row(std::size_t r) const;
  std::vector<double> column(std::size_t c) const;
};

/// Columns are the active rules. `row_ids` defaults to 0..n-1.
FeatureMatrix featurize(const RuleSet &rs, const std::vector<mol::Molecule> &mols,
                        std::vector<std::size_t> row_ids = {});

}  // namespace llm4sd::rules

#endif  // LLM4SD_RULEKIT_RULE_HPP_
