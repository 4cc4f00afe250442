//
// Project llm4sd - Copyright 2026 The llm4sd Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "llm4sd/molgraph/smiles.hpp"
#include "llm4sd/rulekit/json.hpp"
#include "llm4sd/rulekit/rule.hpp"
#include "test_util.hpp"

namespace llm4sd::rules {
namespace {

using mol::parse_smiles;

double eval(const std::string &dsl, const std::string &smiles) {
  return evaluate(parse_expr(dsl), parse_smiles(smiles));
}

TEST(Dsl, Primaries) {
  EXPECT_EQ(parse_expr("desc(mw)").op(), Expr::Op::kDesc);
  EXPECT_EQ(parse_expr("count(C=O)").op(), Expr::Op::kCount);
  EXPECT_EQ(parse_expr("count(C=O)").text(), "C=O");
  EXPECT_EQ(parse_expr(" has( c1ccccc1 ) ").op(), Expr::Op::kHas);
  EXPECT_EQ(parse_expr("has(\"c1ccccc1\")").text(), "c1ccccc1");
  EXPECT_EQ(parse_expr("count(C(=O)O)").text(), "C(=O)O");
}

TEST(Dsl, Kinds) {
  EXPECT_EQ(parse_expr("desc(mw)").value_kind(), ValueKind::kReal);
  EXPECT_EQ(parse_expr("desc(hbd)").value_kind(), ValueKind::kInteger);
  EXPECT_EQ(parse_expr("count(N)").value_kind(), ValueKind::kInteger);
  EXPECT_EQ(parse_expr("has(N)").value_kind(), ValueKind::kBinary);
  EXPECT_EQ(parse_expr("desc(hbd) / desc(hba)").value_kind(), ValueKind::kReal);
}

TEST(Dsl, UnknownDescriptor) {
  try {
    parse_expr("desc(nope)");
    FAIL();
  } catch (const RuleError &e) {
    EXPECT_EQ(e.kind(), RuleErrorKind::kUnknownDescriptor);
    EXPECT_EQ(e.position(), 5u);
  }
}

TEST(Dsl, GrammarErrors) {
  for (const char *bad: {"", "desc(mw", "desc()", "2 desc(mw)", "mass(x)", "desc(mw) +",
                         "desc(mw))", "count(\"C=O)", "inf*desc(mw)"}) {
    try {
      parse_expr(bad);
      ADD_FAILURE() << bad;
    } catch (const RuleError &e) {
      EXPECT_EQ(e.kind(), RuleErrorKind::kGrammar) << bad;
      EXPECT_TRUE(e.position().has_value()) << bad;
    }
  }
}

TEST(Dsl, PatternErrorPropagates) {
  try {
    parse_expr("count(C$C)");
    FAIL();
  } catch (const RuleError &e) {
    EXPECT_EQ(e.kind(), RuleErrorKind::kPattern);
    EXPECT_NE(std::string(e.what()).find("recursive SMARTS unsupported"), std::string::npos);
  }
}

TEST(Dsl, Combinations) {
  const Expr e = parse_expr("0.5*desc(mw) - 2*count(C=O) + desc(hbd) / desc(hba)");
  ASSERT_EQ(e.op(), Expr::Op::kSum);
  ASSERT_EQ(e.children().size(), 3u);
  EXPECT_EQ(e.children()[1].coefficient(), -2.0);
  EXPECT_EQ(e.children()[2].op(), Expr::Op::kRatio);
  // mw(CC=O) = 44.053
  EXPECT_NEAR(evaluate(e, parse_smiles("CC=O")), 0.5 * 44.053 - 2 + 0.0, 1e-9);
}

TEST(Dsl, PrintParseIdentity) {
  for (const char *s: {"desc(mw)", "count(C=O)", "has(c1ccccc1)", "has(\"C(\")",
                       "0.5*desc(mw) + -2*count(C=O)", "desc(hbd) / desc(hba)",
                       "(desc(hbd) + desc(hba)) / desc(heavy_atom_count)",
                       "3*(desc(mw) / desc(tpsa))", "1e-05*desc(mw) + (desc(hba) + desc(hbd))",
                       "count(C(=O)N) / 2*desc(ring_count)", "-1.25*-2*desc(clogp)"}) {
    SCOPED_TRACE(s);
    std::unique_ptr<Expr> e;
    try {
      e = std::make_unique<Expr>(parse_expr(s));
    } catch (const RuleError &err) {
      // "C(" is not a valid pattern; only the quoting path matters here.
      EXPECT_EQ(err.kind(), RuleErrorKind::kPattern);
      continue;
    }
    const std::string printed = to_string(*e);
    EXPECT_EQ(parse_expr(printed), *e) << printed;
    EXPECT_EQ(to_string(parse_expr(printed)), printed);
  }
}

TEST(Evaluate, Examples) {
  EXPECT_EQ(eval("has(c1ccccc1)", "Cc1ccccc1"), 1.0);
  EXPECT_EQ(eval("has(c1ccccc1)", "CCCCCC"), 0.0);
  EXPECT_EQ(eval("count(C=O)", "CC(=O)OC(=O)C"), 2.0);
  EXPECT_NEAR(eval("desc(mw)", "O"), 18.015, 1e-9);
}

TEST(Evaluate, DivisionByZero) {
  std::vector<std::string> warnings;
  EXPECT_EQ(evaluate(parse_expr("desc(hbd) / count(C=O)"), parse_smiles("CCO"), &warnings),
            0.0);
  ASSERT_EQ(warnings.size(), 1u);
  EXPECT_NE(warnings[0].find("division by zero"), std::string::npos);
}

TEST(Evaluate, InvariantUnderRewrite) {
  const std::vector<Expr> exprs = {parse_expr("count(C=O)"), parse_expr("has(c1ccccc1)"),
                                   parse_expr("desc(tpsa) / desc(mw)"),
                                   parse_expr("count(N)")};
  std::mt19937_64 rng(11);
  for (const std::string &s: test::fixture_smiles()) {
    const mol::Molecule m = parse_smiles(s);
    const mol::Molecule p = test::permuted(m, rng);
    for (const Expr &e: exprs)
      EXPECT_NEAR(evaluate(e, m), evaluate(e, p), 1e-9) << s;
  }
}

RuleSet sample_ruleset() {
  RuleSet rs;
  rs.task = "BBBP";
  rs.rules.push_back({"syn-1", Provenance::kSynthesized,
                      "High molecular weight | lowers permeability", parse_expr("desc(mw)"), ""});
  rs.rules.push_back({"inf-1", Provenance::kInferred, "Carbonyl groups\nmatter",
                      parse_expr("count(C=O)"), ""});
  rs.rules.push_back({"syn-2", Provenance::kSynthesized, "Consider the molecule's smell",
                      std::nullopt, "no phrase mapping | fallback declined"});
  rs.rules.push_back({"man-1", Provenance::kManual, " leading space\\backslash",
                      parse_expr("has(c1ccccc1)"), ""});
  return rs;
}

TEST(RuleSetFile, RoundTrip) {
  const RuleSet rs = sample_ruleset();
  const std::string text = format_ruleset(rs);
  EXPECT_EQ(parse_ruleset(text), rs);
  const auto path = std::filesystem::temp_directory_path() / "llm4sd_rules_test.txt";
  save_ruleset(rs, path.string());
  EXPECT_EQ(load_ruleset(path.string()), rs);
  std::filesystem::remove(path);
  EXPECT_EQ(rs.active().size(), 3u);
}

TEST(RuleSetFile, Errors) {
  EXPECT_THROW(parse_ruleset("@task X\na | manual | desc(mw) | t\na | manual | desc(mw) | u\n"),
               RuleError);
  try {
    parse_ruleset("@task X\na | manual | desc(mw) | t\nb | manual | desc(zz) | u\n");
    FAIL();
  } catch (const RuleError &e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
  }
  EXPECT_THROW(parse_ruleset("@task X\na | manual | desc(mw)\n"), RuleError);
  EXPECT_THROW(parse_ruleset("@task X\na | robot | desc(mw) | t\n"), RuleError);
  EXPECT_THROW(parse_ruleset("a | manual | desc(mw) | t\n"), RuleError);
  const RuleSet empty = parse_ruleset("# nothing\n@task ESOL\n");
  EXPECT_EQ(empty.task, "ESOL");
  EXPECT_TRUE(empty.rules.empty());
}

TEST(RuleSetJson, RoundTrip) {
  const RuleSet rs = sample_ruleset();
  const nlohmann::json j = ruleset_to_json(rs);
  EXPECT_EQ(j["rules"][0]["dsl"], "desc(mw)");
  EXPECT_EQ(j["rules"][0]["value_kind"], "real");
  EXPECT_EQ(j["rules"][2]["transcribed"], false);
  EXPECT_EQ(ruleset_from_json(j), rs);
}

TEST(Featurize, Basics) {
  RuleSet rs;
  rs.task = "t";
  const auto none = featurize(rs, {parse_smiles("C"), parse_smiles("CC")});
  EXPECT_EQ(none.rows, 2u);
  EXPECT_EQ(none.cols(), 0u);

  rs.rules.push_back({"a", Provenance::kManual, "", parse_expr("desc(mw)"), ""});
  rs.rules.push_back({"b", Provenance::kManual, "", parse_expr("has(C=O)"), ""});
  const FeatureMatrix fm = featurize(rs, {parse_smiles("CC=O")});
  ASSERT_EQ(fm.cols(), 2u);
  EXPECT_NEAR(fm.at(0, 0), 44.053, 1e-9);
  EXPECT_EQ(fm.at(0, 1), 1.0);
}

TEST(Featurize, ColumnsMatchEvaluateAndRowsPermute) {
  const RuleSet rs = sample_ruleset();
  std::vector<mol::Molecule> mols;
  for (const std::string &s: test::fixture_smiles())
    mols.push_back(parse_smiles(s));
  const FeatureMatrix fm = featurize(rs, mols);
  const auto active = rs.active();
  ASSERT_EQ(fm.cols(), active.size());
  for (std::size_t j = 0; j < active.size(); ++j)
    for (std::size_t i = 0; i < mols.size(); ++i)
      ASSERT_EQ(fm.at(i, j), evaluate(*active[j]->expr, mols[i]));

  std::vector<std::size_t> perm(mols.size());
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), std::mt19937_64(3));
  std::vector<mol::Molecule> shuffled;
  for (std::size_t k: perm)
    shuffled.push_back(mols[k]);
  const FeatureMatrix fp = featurize(rs, shuffled, perm);
  for (std::size_t i = 0; i < perm.size(); ++i) {
    EXPECT_EQ(fp.row(i), fm.row(perm[i]));
    EXPECT_EQ(fp.row_ids[i], perm[i]);
  }
}

}  // namespace
}  // namespace llm4sd::rules
