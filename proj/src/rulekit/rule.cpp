//
// Project llm4sd - Copyright 2026 The llm4sd Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "llm4sd/rulekit/rule.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "llm4sd/descriptors/descriptors.hpp"

namespace llm4sd::rules {

RuleError::RuleError(RuleErrorKind kind, std::string message,
                     std::optional<std::size_t> position)
    : std::runtime_error(position ? message + " at position " + std::to_string(*position)
                                  : message),
      kind_(kind), position_(position) { }

std::string_view value_kind_name(ValueKind kind) {
  switch (kind) {
  case ValueKind::kInteger:
    return "integer";
  case ValueKind::kReal:
    return "real";
  case ValueKind::kBinary:
    return "binary";
  }
  return "real";
}

std::string_view provenance_name(Provenance p) {
  switch (p) {
  case Provenance::kSynthesized:
    return "synthesized";
  case Provenance::kInferred:
    return "inferred";
  case Provenance::kManual:
    return "manual";
  }
  return "manual";
}

std::optional<Provenance> provenance_from_name(std::string_view name) {
  for (Provenance p: {Provenance::kSynthesized, Provenance::kInferred, Provenance::kManual})
    if (provenance_name(p) == name)
      return p;
  return std::nullopt;
}

// ---- expressions --------------------------------------------------------

Expr Expr::desc(std::string name) {
  if (desc::find_descriptor(name) == nullptr)
    throw RuleError(RuleErrorKind::kUnknownDescriptor, "unknown descriptor '" + name + "'");
  Expr e;
  e.op_ = Op::kDesc;
  e.text_ = std::move(name);
  return e;
}

Expr Expr::count(std::string pattern) {
  Expr e;
  e.op_ = Op::kCount;
  e.pattern_ = std::make_shared<const mol::Pattern>(mol::parse_pattern(pattern));
  e.text_ = std::move(pattern);
  return e;
}

Expr Expr::has(std::string pattern) {
  Expr e = count(std::move(pattern));
  e.op_ = Op::kHas;
  return e;
}

Expr Expr::scale(double coefficient, Expr child) {
  Expr e;
  e.op_ = Op::kScale;
  e.coefficient_ = coefficient;
  e.children_.push_back(std::move(child));
  return e;
}

Expr Expr::sum(std::vector<Expr> terms) {
  if (terms.size() < 2)
    throw std::invalid_argument("sum needs at least two terms");
  Expr e;
  e.op_ = Op::kSum;
  e.children_ = std::move(terms);
  return e;
}

Expr Expr::ratio(Expr numerator, Expr denominator) {
  Expr e;
  e.op_ = Op::kRatio;
  e.children_.push_back(std::move(numerator));
  e.children_.push_back(std::move(denominator));
  return e;
}

ValueKind Expr::value_kind() const {
  switch (op_) {
  case Op::kDesc:
    return desc::find_descriptor(text_)->kind == desc::ValueKind::kInteger
               ? ValueKind::kInteger
               : ValueKind::kReal;
  case Op::kCount:
    return ValueKind::kInteger;
  case Op::kHas:
    return ValueKind::kBinary;
  default:
    return ValueKind::kReal;
  }
}

bool operator==(const Expr &a, const Expr &b) {
  return a.op_ == b.op_ && a.text_ == b.text_ && a.coefficient_ == b.coefficient_
         && a.children_ == b.children_;
}

namespace {

std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

class ExprParser {
public:
  explicit ExprParser(std::string_view s): s_(s) { }

  Expr parse() {
    Expr e = expr();
    skip();
    if (pos_ != s_.size())
      fail("unexpected '" + std::string(1, s_[pos_]) + "'");
    return e;
  }

private:
  [[noreturn]] void fail(const std::string &msg) const {
    throw RuleError(RuleErrorKind::kGrammar, msg, pos_);
  }

  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_])))
      ++pos_;
  }

  char peek() {
    skip();
    return pos_ < s_.size() ? s_[pos_] : '\0';
  }

  void expect(char c) {
    if (peek() != c)
      fail(std::string("expected '") + c + "'");
    ++pos_;
  }

  Expr expr() {
    std::vector<Expr> terms{term()};
    while (true) {
      const char c = peek();
      if (c != '+' && c != '-')
        break;
      ++pos_;
      Expr t = term();
      if (c == '-')
        t = t.op() == Expr::Op::kScale ? Expr::scale(-t.coefficient(), t.children()[0])
                                       : Expr::scale(-1.0, std::move(t));
      terms.push_back(std::move(t));
    }
    if (terms.size() == 1)
      return std::move(terms[0]);
    return Expr::sum(std::move(terms));
  }

  Expr term() {
    Expr num = factor();
    if (peek() != '/')
      return num;
    ++pos_;
    return Expr::ratio(std::move(num), factor());
  }

  Expr factor() {
    const char c = peek();
    if (c == '(') {
      ++pos_;
      Expr e = expr();
      expect(')');
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '-' || c == '+' || c == '.') {
      const std::size_t start = pos_;
      double v = 0;
      const auto res = std::from_chars(s_.data() + pos_ + (c == '+'), s_.data() + s_.size(), v);
      if (res.ec != std::errc() || !std::isfinite(v))
        fail("malformed number");
      pos_ = static_cast<std::size_t>(res.ptr - s_.data());
      if (peek() != '*') {
        pos_ = start;
        fail("expected '*' after coefficient");
      }
      ++pos_;
      return Expr::scale(v, factor());
    }
    return primary();
  }

  Expr primary() {
    skip();
    const std::size_t start = pos_;
    while (pos_ < s_.size() && std::isalpha(static_cast<unsigned char>(s_[pos_])))
      ++pos_;
    const std::string_view word = s_.substr(start, pos_ - start);
    if (word != "desc" && word != "count" && word != "has") {
      pos_ = start;
      fail(word.empty() ? "expected an expression"
                        : "unknown function '" + std::string(word) + "'");
    }
    expect('(');
    skip();
    const std::size_t arg_pos = pos_;
    const std::string arg = argument();
    if (word == "desc") {
      try {
        return Expr::desc(arg);
      } catch (const RuleError &e) {
        throw RuleError(e.kind(), "unknown descriptor '" + arg + "'", arg_pos);
      }
    }
    try {
      return word == "count" ? Expr::count(arg) : Expr::has(arg);
    } catch (const mol::ParseError &e) {
      throw RuleError(RuleErrorKind::kPattern, "pattern '" + arg + "': " + e.detail(),
                      arg_pos + e.position().value_or(0));
    }
  }

  // Reads up to the closing parenthesis of the call and consumes it.
  std::string argument() {
    const char q = peek();
    if (q == '"' || q == '\'') {
      const std::size_t close = s_.find(q, pos_ + 1);
      if (close == std::string_view::npos)
        fail("unterminated quote");
      std::string out(s_.substr(pos_ + 1, close - pos_ - 1));
      pos_ = close + 1;
      expect(')');
      return out;
    }
    const std::size_t start = pos_;
    int depth = 0;
    while (pos_ < s_.size()) {
      const char c = s_[pos_];
      if (c == '(')
        ++depth;
      else if (c == ')') {
        if (depth == 0)
          break;
        --depth;
      }
      ++pos_;
    }
    if (pos_ == s_.size())
      fail("missing ')'");
    std::string out(s_.substr(start, pos_ - start));
    while (!out.empty() && std::isspace(static_cast<unsigned char>(out.back())))
      out.pop_back();
    ++pos_;
    if (out.empty())
      throw RuleError(RuleErrorKind::kGrammar, "empty argument", start);
    return out;
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

bool needs_quotes(const std::string &pattern) {
  int depth = 0;
  for (char c: pattern) {
    if (c == '(')
      ++depth;
    else if (c == ')' && --depth < 0)
      return true;
    else if (c == '"' || c == '\'')
      return true;
  }
  return depth != 0;
}

std::string to_string_inner(const Expr &e, bool nested) {
  switch (e.op()) {
  case Expr::Op::kDesc:
    return "desc(" + e.text() + ")";
  case Expr::Op::kCount:
  case Expr::Op::kHas: {
    const std::string fn = e.op() == Expr::Op::kCount ? "count(" : "has(";
    return fn + (needs_quotes(e.text()) ? "\"" + e.text() + "\"" : e.text()) + ")";
  }
  case Expr::Op::kScale:
    return format_number(e.coefficient()) + "*" + to_string_inner(e.children()[0], true);
  case Expr::Op::kSum: {
    std::string out;
    for (std::size_t i = 0; i < e.children().size(); ++i) {
      if (i > 0)
        out += " + ";
      out += to_string_inner(e.children()[i], e.children()[i].op() == Expr::Op::kSum);
    }
    return nested ? "(" + out + ")" : out;
  }
  case Expr::Op::kRatio: {
    const std::string out = to_string_inner(e.children()[0], true) + " / "
                            + to_string_inner(e.children()[1], true);
    return nested ? "(" + out + ")" : out;
  }
  }
  return {};
}

}  // namespace

Expr parse_expr(std::string_view text) { return ExprParser(text).parse(); }

std::string to_string(const Expr &e) { return to_string_inner(e, false); }

double evaluate(const Expr &e, const mol::Molecule &m, std::vector<std::string> *warnings) {
  switch (e.op()) {
  case Expr::Op::kDesc:
    return desc::compute(m, e.text(), desc::CoveragePolicy::kZero, warnings);
  case Expr::Op::kCount:
    return static_cast<double>(mol::count_matches(m, *e.pattern_));
  case Expr::Op::kHas:
    return mol::has_match(m, *e.pattern_) ? 1.0 : 0.0;
  case Expr::Op::kScale:
    return e.coefficient() * evaluate(e.children()[0], m, warnings);
  case Expr::Op::kSum: {
    double s = 0.0;
    for (const Expr &c: e.children())
      s += evaluate(c, m, warnings);
    return s;
  }
  case Expr::Op::kRatio: {
    const double den = evaluate(e.children()[1], m, warnings);
    if (den == 0.0) {
      if (warnings != nullptr)
        warnings->push_back("division by zero in " + to_string(e) + "; value set to 0");
      return 0.0;
    }
    return evaluate(e.children()[0], m, warnings) / den;
  }
  }
  return 0.0;
}

// ---- rulesets -----------------------------------------------------------

std::vector<const Rule *> RuleSet::active() const {
  std::vector<const Rule *> out;
  for (const Rule &r: rules)
    if (r.transcribed())
      out.push_back(&r);
  return out;
}

void check_unique_ids(const RuleSet &rs) {
  std::set<std::string> seen;
  for (const Rule &r: rs.rules) {
    if (r.id.empty())
      throw RuleError(RuleErrorKind::kFile, "rule with empty id");
    if (!seen.insert(r.id).second)
      throw RuleError(RuleErrorKind::kFile, "duplicate rule id '" + r.id + "'");
  }
}

namespace {

std::string escape(std::string_view s) {
  std::string out;
  for (char c: s) {
    if (c == '|' || c == '\\')
      out += '\\';
    if (c == '\n')
      out += "\\n";
    else
      out += c;
  }
  return out;
}

std::vector<std::string> split_fields(std::string_view line, int lineno) {
  std::vector<std::string> fields(1);
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (c == '\\') {
      if (i + 1 == line.size())
        throw RuleError(RuleErrorKind::kFile,
                        "line " + std::to_string(lineno) + ": dangling escape");
      const char n = line[++i];
      fields.back() += n == 'n' ? '\n' : n;
    } else if (c == '|') {
      fields.emplace_back();
    } else {
      fields.back() += c;
    }
  }
  // The writer puts one space on each side of a separator.
  for (std::size_t k = 0; k < fields.size(); ++k) {
    std::string &f = fields[k];
    if (k + 1 < fields.size() && !f.empty() && f.back() == ' ')
      f.pop_back();
    if (k > 0 && !f.empty() && f.front() == ' ')
      f.erase(0, 1);
  }
  return fields;
}

}  // namespace

std::string format_ruleset(const RuleSet &rs) {
  check_unique_ids(rs);
  std::ostringstream out;
  out << "# llm4sd ruleset, version 1\n";
  out << "# id | provenance | dsl | source text\n";
  out << "@task " << rs.task << "\n";
  for (const Rule &r: rs.rules) {
    out << escape(r.id) << " | " << provenance_name(r.provenance) << " | "
        << (r.expr ? escape(to_string(*r.expr)) : "!" + escape(r.reason)) << " | "
        << escape(r.source_text) << "\n";
  }
  return out.str();
}

RuleSet parse_ruleset(std::string_view text) {
  RuleSet rs;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  bool have_task = false;
  auto fail = [&](const std::string &msg) {
    return RuleError(RuleErrorKind::kFile, "line " + std::to_string(lineno) + ": " + msg);
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r')
      line.pop_back();
    if (line.empty() || line[0] == '#')
      continue;
    if (line.starts_with("@task")) {
      if (have_task)
        throw fail("second @task line");
      std::string_view rest = std::string_view(line).substr(5);
      while (!rest.empty() && rest.front() == ' ')
        rest.remove_prefix(1);
      rs.task = std::string(rest);
      have_task = true;
      continue;
    }
    const std::vector<std::string> f = split_fields(line, lineno);
    if (f.size() != 4)
      throw fail("expected 4 fields, found " + std::to_string(f.size()));
    Rule r;
    r.id = f[0];
    const auto prov = provenance_from_name(f[1]);
    if (!prov)
      throw fail("unknown provenance '" + f[1] + "'");
    r.provenance = *prov;
    if (!f[2].empty() && f[2][0] == '!') {
      r.reason = f[2].substr(1);
    } else {
      try {
        r.expr = parse_expr(f[2]);
      } catch (const RuleError &e) {
        throw fail(e.what());
      }
    }
    r.source_text = f[3];
    rs.rules.push_back(std::move(r));
  }
  if (!have_task)
    throw RuleError(RuleErrorKind::kFile, "missing @task line");
  try {
    check_unique_ids(rs);
  } catch (const RuleError &e) {
    throw RuleError(RuleErrorKind::kFile, std::string("ruleset: ") + e.what());
  }
  return rs;
}

void save_ruleset(const RuleSet &rs, const std::string &path) {
  const std::string text = format_ruleset(rs);
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw RuleError(RuleErrorKind::kFile, "cannot write " + path);
  out << text;
}

RuleSet load_ruleset(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw RuleError(RuleErrorKind::kFile, "cannot read " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_ruleset(buf.str());
  } catch (const RuleError &e) {
    throw RuleError(RuleErrorKind::kFile, path + ": " + e.what());
  }
}

// ---- features -----------------------------------------------------------

std::vector<double> FeatureMatrix::row(std::size_t r) const {
  return {values.begin() + static_cast<std::ptrdiff_t>(r * cols()),
          values.begin() + static_cast<std::ptrdiff_t>((r + 1) * cols())};
}

std::vector<double> FeatureMatrix::column(std::size_t c) const {
  std::vector<double> out(rows);
  for (std::size_t r = 0; r < rows; ++r)
    out[r] = at(r, c);
  return out;
}

FeatureMatrix featurize(const RuleSet &rs, const std::vector<mol::Molecule> &mols,
                        std::vector<std::size_t> row_ids) {
  const std::vector<const Rule *> active = rs.active();
  FeatureMatrix fm;
  fm.rows = mols.size();
  for (const Rule *r: active)
    fm.columns.push_back(r->id);
  if (row_ids.empty())
    for (std::size_t i = 0; i < mols.size(); ++i)
      row_ids.push_back(i);
  if (row_ids.size() != mols.size())
    throw std::invalid_argument("featurize: row_ids and molecules differ in length");
  fm.row_ids = std::move(row_ids);
  fm.values.resize(fm.rows * fm.cols());
  std::vector<std::string> warnings;
  for (std::size_t i = 0; i < mols.size(); ++i) {
    for (std::size_t j = 0; j < active.size(); ++j) {
      warnings.clear();
      fm.values[i * fm.cols() + j] = evaluate(*active[j]->expr, mols[i], &warnings);
      for (std::string &w: warnings)
        fm.warnings.push_back({i, j, std::move(w)});
    }
  }
  return fm;
}

}  // namespace llm4sd::rules
