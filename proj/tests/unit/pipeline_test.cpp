//
// Project llm4sd - Copyright 2026 The llm4sd Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <algorithm>
#include <filesystem>
#include <set>

#include <gtest/gtest.h>
#include <httplib.h>

#include "llm4sd/molgraph/smiles.hpp"
#include "llm4sd/pipeline/config.hpp"
#include "llm4sd/pipeline/pipeline.hpp"
#include "llm4sd/pipeline/service.hpp"
#include "llm4sd/rulekit/rule.hpp"
#include "llm4sd/stats/stats.hpp"
#include "llm4sd/util/csv.hpp"
#include "test_util.hpp"

namespace llm4sd::pipeline {
namespace {

namespace fs = std::filesystem;
using test::fixture_path;

fs::path scratch(const std::string &name) {
  const fs::path p = fs::temp_directory_path() / ("llm4sd_pipeline_" + std::to_string(::getpid())) / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

RunConfig bbbp_config() {
  RunConfig c = load_config(fixture_path("replay/bbbp_config.json"));
  c.dataset_path = fixture_path("bbbp_fixture.csv");
  c.transcript_path = fixture_path("replay/bbbp_transcript.jsonl");
  c.output_dir = scratch("runs").string();
  return c;
}

std::set<std::string> exprs(const rules::RuleSet &rs) {
  std::set<std::string> out;
  for (const rules::Rule *r: rs.active())
    out.insert(rules::to_string(*r->expr));
  return out;
}

// Everything derived from the committed transcript, computed once.
struct Replay {
  RunConfig config = bbbp_config();
  TaskData data = load_task_data(config);
  std::unique_ptr<oracle::Backend> backend = make_backend(config);
  rules::RuleSet syn = run_synthesis(config, *backend);
  rules::RuleSet inf = run_inference(config, data, *backend);
  rules::RuleSet combined = combine_rulesets({syn, inf}, "bbbp");
  TrainedTask trained = run_train(config, data, combined);

  static const Replay &get() {
    static const Replay r;
    return r;
  }
};

std::size_t index_of(const TrainedTask &t, const std::string &dsl) {
  for (std::size_t i = 0; i < t.ruleset.rules.size(); ++i)
    if (rules::to_string(*t.ruleset.rules[i].expr) == dsl)
      return i;
  return t.ruleset.rules.size();
}

// ---- config -------------------------------------------------------------

TEST(RunConfig, JsonRoundTripAndHash) {
  RunConfig c = bbbp_config();
  c.model = ModelChoice::kLinear;
  c.manual_rulesets = {"a.rules"};
  c.forest.max_depth = 4;
  const RunConfig back = config_from_json(to_json(c));
  EXPECT_EQ(to_json(back), to_json(c));
  EXPECT_EQ(config_hash(back), config_hash(c));
  RunConfig moved = c;
  moved.output_dir = "/elsewhere";
  EXPECT_EQ(config_hash(moved), config_hash(c));
  moved.seed = 8;
  EXPECT_NE(config_hash(moved), config_hash(c));
}

TEST(RunConfig, RejectsUnknownKeysAndBadValues) {
  const auto code = [](const nlohmann::json &j) {
    try {
      config_from_json(j);
    } catch (const PipelineError &e) {
      return static_cast<int>(e.code());
    }
    return 0;
  };
  EXPECT_EQ(code({{"tsak", "bbbp"}}), kExitUsage);
  EXPECT_EQ(code({{"forest", {{"trees", 3}}}}), kExitUsage);
  EXPECT_EQ(code({{"model", "svm"}}), kExitUsage);
  EXPECT_EQ(code({{"split", "temporal"}}), kExitUsage);
  EXPECT_EQ(code({{"seed", "seven"}}), kExitUsage);
  EXPECT_EQ(code({{"task", "bbbp"}}), 0);
}

TEST(RunConfig, NeedsARuleSourceAndATranscriptForReplay) {
  RunConfig c = bbbp_config();
  EXPECT_NO_THROW(validate(c));
  RunConfig none = c;
  none.synthesis = none.inference = false;
  EXPECT_THROW(validate(none), PipelineError);
  none.manual_rulesets = {"x.rules"};
  EXPECT_NO_THROW(validate(none));
  RunConfig no_transcript = c;
  no_transcript.transcript_path.clear();
  try {
    validate(no_transcript);
    FAIL();
  } catch (const PipelineError &e) {
    EXPECT_EQ(e.code(), kExitUsage);
    EXPECT_NE(std::string(e.what()).find("transcript"), std::string::npos);
  }
  RunConfig unknown = c;
  unknown.task = "bbbp2";
  EXPECT_THROW(validate(unknown), PipelineError);
}

// ---- rule sources -------------------------------------------------------

TEST(Synthesis, ReplayYieldsTheBbbpDeterminants) {
  const auto &r = Replay::get();
  const auto e = exprs(r.syn);
  for (const char *d: {"desc(mw)", "desc(clogp)", "desc(tpsa)", "desc(hbd)", "desc(hba)"})
    EXPECT_TRUE(e.count(d)) << d;
  EXPECT_EQ(r.syn.rules.size(), 30u);
  for (const rules::Rule &rule: r.syn.rules) {
    EXPECT_EQ(rule.provenance, rules::Provenance::kSynthesized);
    EXPECT_EQ(rule.id.rfind("syn-", 0), 0u);
    if (!rule.transcribed())
      EXPECT_FALSE(rule.reason.empty());
  }
}

TEST(Synthesis, ReplayRerunIsByteIdentical) {
  const auto &r = Replay::get();
  const auto backend = make_backend(r.config);
  EXPECT_EQ(rules::format_ruleset(run_synthesis(r.config, *backend)), rules::format_ruleset(r.syn));
}

TEST(Synthesis, NothingTranscribableIsAnOracleErrorListingReasons) {
  oracle::FunctionBackend backend(
      [](const oracle::Prompt &) { return std::string("1. Be nice.\n2. Avoid being weird.\n"); }, "fn");
  try {
    run_synthesis(bbbp_config(), backend);
    FAIL();
  } catch (const PipelineError &e) {
    EXPECT_EQ(e.code(), kExitOracle);
    const std::string msg = e.what();
    EXPECT_NE(msg.find("syn-01"), std::string::npos);
    EXPECT_NE(msg.find("syn-02"), std::string::npos);
    EXPECT_NE(msg.find("no registry phrase matches"), std::string::npos);
  }
}

TEST(Synthesis, ReplayMissIsAnOracleError) {
  RunConfig c = bbbp_config();
  c.synthesis_rules = 20;  // a prompt the transcript never saw
  const auto backend = make_backend(c);
  try {
    run_synthesis(c, *backend);
    FAIL();
  } catch (const PipelineError &e) {
    EXPECT_EQ(e.code(), kExitOracle);
    EXPECT_NE(std::string(e.what()).find("replay miss"), std::string::npos);
  }
}

TEST(Inference, ReplayYieldsCarbonylAndRingRules) {
  const auto &r = Replay::get();
  EXPECT_LE(r.inf.rules.size(), 30u);
  const auto e = exprs(r.inf);
  EXPECT_TRUE(e.count("count(C=O)"));
  EXPECT_TRUE(e.count("desc(ring_count)"));
  for (const rules::Rule &rule: r.inf.rules)
    EXPECT_EQ(rule.provenance, rules::Provenance::kInferred);
}

TEST(Inference, SendsOnePromptPerBatchThenOneSummary) {
  const auto &r = Replay::get();
  std::map<oracle::Purpose, int> calls;
  std::vector<std::string> inference_prompts;
  oracle::FunctionBackend backend(
      [&](const oracle::Prompt &p) {
        ++calls[p.purpose];
        if (p.purpose == oracle::Purpose::kInference)
          inference_prompts.push_back(p.text);
        return std::string("1. carbonyl groups matter\n2. rings matter\n3. logP matters\n4. extra\n");
      },
      "fn");
  const rules::RuleSet rs = run_inference(r.config, r.data, backend);
  EXPECT_EQ(calls[oracle::Purpose::kInference], 10);
  EXPECT_EQ(calls[oracle::Purpose::kSummarize], 1);
  EXPECT_EQ(calls.size(), 2u);
  // 25 data lines per batch, drawn from the training partition only.
  const std::set<std::size_t> train(r.data.split.train.begin(), r.data.split.train.end());
  std::set<std::string> train_smiles;
  for (std::size_t id: train)
    train_smiles.insert(r.data.dataset.at(id).smiles);
  for (const std::string &p: inference_prompts) {
    const auto lines = p.substr(p.find('\n') + 1);
    std::istringstream in(lines);
    std::string line;
    int n = 0;
    while (std::getline(in, line)) {
      ++n;
      EXPECT_TRUE(train_smiles.count(line.substr(0, line.rfind(' ')))) << line;
    }
    EXPECT_EQ(n, 25);
  }
  // Four summarized items, three of them transcribable.
  EXPECT_EQ(rs.rules.size(), 4u);
  EXPECT_EQ(rs.active().size(), 3u);
}

TEST(Inference, EmptyTrainingPartitionIsADataError) {
  const auto &r = Replay::get();
  TaskData empty = r.data;
  empty.split.train.clear();
  oracle::FunctionBackend backend([](const oracle::Prompt &) { return std::string(); }, "fn");
  try {
    run_inference(r.config, empty, backend);
    FAIL();
  } catch (const PipelineError &e) {
    EXPECT_EQ(e.code(), kExitData);
  }
}

TEST(Combine, MergesDuplicateExpressionsFirstWins) {
  const auto &r = Replay::get();
  EXPECT_LE(r.combined.rules.size(), r.syn.active().size() + r.inf.active().size());
  std::set<std::string> seen;
  for (const rules::Rule &rule: r.combined.rules)
    EXPECT_TRUE(seen.insert(rules::to_string(*rule.expr)).second) << rule.id;
  // desc(mw) comes from both sources; the synthesized rule is kept.
  const auto it = std::find_if(r.combined.rules.begin(), r.combined.rules.end(), [](const auto &x) {
    return rules::to_string(*x.expr) == "desc(mw)";
  });
  ASSERT_NE(it, r.combined.rules.end());
  EXPECT_EQ(it->id, "syn-01");
  EXPECT_EQ(exprs(r.combined).size(), r.combined.rules.size());
  EXPECT_TRUE(exprs(r.combined).count("count(C=O)"));
  for (const rules::Rule &rule: r.combined.rules)
    EXPECT_TRUE(rule.transcribed());
}

// ---- training -----------------------------------------------------------

TEST(Train, ReportsMetricsForEveryPartition) {
  const auto &t = Replay::get().trained;
  for (const char *p: {"train", "valid", "test"}) {
    ASSERT_TRUE(t.metrics.count(p)) << p;
    EXPECT_TRUE(t.metrics.at(p).auc.has_value()) << p;
    EXPECT_GT(t.metrics.at(p).n, 0u);
  }
  EXPECT_EQ(t.importances.size(), t.ruleset.rules.size());
  double sum = 0;
  for (double v: t.importances)
    sum += v;
  EXPECT_NEAR(sum, 1.0, 1e-9);
  EXPECT_EQ(t.provenance.transcript_hash, file_sha256(fixture_path("replay/bbbp_transcript.jsonl")));
  EXPECT_EQ(t.provenance.dataset_checksum, file_sha256(fixture_path("bbbp_fixture.csv")));
  EXPECT_EQ(t.provenance.model_hash, learn::model_hash(t.model));
}

TEST(Train, RerunIsDeterministic) {
  const auto &r = Replay::get();
  RunConfig c = r.config;
  c.forest.threads = 3;
  const TrainedTask again = run_train(c, r.data, r.combined);
  EXPECT_EQ(learn::model_hash(again.model), learn::model_hash(r.trained.model));
  EXPECT_EQ(metrics_to_json(again), metrics_to_json(r.trained));
  EXPECT_EQ(again.importances, r.trained.importances);
}

TEST(Train, SingleClassTrainingLabelsAreADataError) {
  const fs::path dir = scratch("degenerate");
  std::string csv = "smiles,p_np\n";
  const char *mols[] = {"CCO", "c1ccccc1", "c1ccncc1", "C1CCCCC1", "CC(=O)O", "c1ccc2ccccc2c1",
                        "CCN", "C1CCNCC1", "c1ccoc1", "CCCCO", "c1ccsc1", "C1CCOC1"};
  for (const char *m: mols)
    csv += std::string(m) + ",1\n";
  util::write_text_file((dir / "one_class.csv").string(), csv);
  RunConfig c = bbbp_config();
  c.dataset_path = (dir / "one_class.csv").string();
  const TaskData data = load_task_data(c);
  try {
    run_train(c, data, Replay::get().combined);
    FAIL();
  } catch (const PipelineError &e) {
    EXPECT_EQ(e.code(), kExitData);
    EXPECT_NE(std::string(e.what()).find("single class"), std::string::npos);
  }
}

TEST(Train, LinearModelAndRegressionTask) {
  RunConfig c;
  c.task = "esol";
  c.dataset_path = fixture_path("esol_fixture.csv");
  c.synthesis = c.inference = false;
  c.model = ModelChoice::kLinear;
  const TaskData data = load_task_data(c);
  rules::RuleSet rs;
  rs.task = "esol";
  for (const auto &[id, dsl]: {std::pair{"m-01", "desc(clogp)"}, std::pair{"m-02", "desc(mw)"},
                               std::pair{"m-03", "desc(tpsa)"}})
    rs.rules.push_back({id, rules::Provenance::kManual, "", rules::parse_expr(dsl), ""});
  const TrainedTask t = run_train(c, data, rs);
  EXPECT_EQ(t.kind(), learn::TaskKind::kRegression);
  for (const char *p: {"train", "valid", "test"}) {
    ASSERT_TRUE(t.metrics.at(p).rmse.has_value());
    EXPECT_GE(*t.metrics.at(p).rmse, *t.metrics.at(p).mae);
  }
  // Solubility falls with logP.
  EXPECT_LT(std::get<learn::LinearModel>(t.model).coefficients[0], 0.0);
}

// ---- validation ---------------------------------------------------------

TEST(Validate, MolecularWeightAndCarbonylAreSignificant) {
  const auto &r = Replay::get();
  const auto verdicts = run_validate_rules(r.trained, r.data);
  ASSERT_EQ(verdicts.size(), r.trained.ruleset.rules.size());
  for (const char *dsl: {"desc(mw)", "count(C=O)"}) {
    const std::size_t i = index_of(r.trained, dsl);
    ASSERT_LT(i, verdicts.size());
    EXPECT_EQ(verdicts[i].test.method, stats::Method::kMannWhitney);
    EXPECT_LT(verdicts[i].test.p_value, 0.05) << dsl;
    EXPECT_TRUE(verdicts[i].significant);
    EXPECT_FALSE(verdicts[i].literature_supported.has_value());
  }
  std::size_t total = 0;
  for (const auto &[cat, n]: category_counts(verdicts))
    total += n;
  EXPECT_EQ(total, verdicts.size());
  EXPECT_EQ(category_counts(run_validate_rules(r.trained, r.data)), category_counts(verdicts));
}

TEST(Validate, AnnotationsDriveTheThreeCategories) {
  const auto &r = Replay::get();
  const auto notes =
      stats::parse_annotations(test::read_file(fixture_path("replay/bbbp_annotations.csv")));
  const auto verdicts = run_validate_rules(r.trained, r.data, notes);
  const auto counts = category_counts(verdicts);
  EXPECT_GT(counts.at("significant_supported"), 0u);
  EXPECT_GT(counts.at("significant_not_found"), 0u);
  const auto &mw = verdicts[index_of(r.trained, "desc(mw)")];
  EXPECT_EQ(mw.category, stats::Category::kSignificantSupported);
  EXPECT_FALSE(mw.citation_note.empty());
}

TEST(Validate, ConstantFeatureIsDegenerateAndInsignificant) {
  const auto &r = Replay::get();
  rules::RuleSet rs;
  rs.task = "bbbp";
  rs.rules.push_back({"c-01", rules::Provenance::kManual, "", rules::parse_expr("count([#92])"), ""});
  rs.rules.push_back({"c-02", rules::Provenance::kManual, "", rules::parse_expr("desc(mw)"), ""});
  const TrainedTask t = run_train(r.config, r.data, rs);
  const auto v = run_validate_rules(t, r.data);
  EXPECT_TRUE(v[0].test.degenerate);
  EXPECT_DOUBLE_EQ(v[0].test.p_value, 1.0);
  EXPECT_EQ(v[0].category, stats::Category::kInsignificant);

  RunConfig reg;
  reg.task = "esol";
  reg.dataset_path = fixture_path("esol_fixture.csv");
  const TaskData esol = load_task_data(reg);
  const TrainedTask te = run_train(reg, esol, rs);
  const auto ve = run_validate_rules(te, esol);
  EXPECT_EQ(ve[0].test.method, stats::Method::kSlopeT);
  EXPECT_TRUE(ve[0].test.degenerate);
  EXPECT_EQ(ve[0].category, stats::Category::kInsignificant);
  EXPECT_EQ(ve[1].test.method, stats::Method::kSlopeT);
  EXPECT_LT(ve[1].test.p_value, 0.05);
}

// ---- explanation --------------------------------------------------------

TEST(Explain, TopKSortedAndClamped) {
  const auto &t = Replay::get().trained;
  const mol::Molecule m = mol::parse_smiles("CCO");
  const Explanation e = explain(t, m, "CCO", 3);
  ASSERT_EQ(e.contributions.size(), 3u);
  for (std::size_t i = 1; i < 3; ++i)
    EXPECT_GE(e.contributions[i - 1].importance, e.contributions[i].importance);
  const double top = *std::max_element(t.importances.begin(), t.importances.end());
  EXPECT_EQ(e.contributions[0].importance, top);
  EXPECT_EQ(explain(t, m, "CCO", 1000).contributions.size(), t.ruleset.rules.size());
  EXPECT_TRUE(explain(t, m, "CCO", 0).contributions.empty());
  ASSERT_TRUE(e.probability.has_value());
  EXPECT_EQ(e.prediction, *e.probability >= 0.5 ? 1.0 : 0.0);
  EXPECT_EQ(e.generator, "template");
}

TEST(Explain, TemplateIsDeterministic) {
  const auto &t = Replay::get().trained;
  const mol::Molecule m = mol::parse_smiles("CC(=O)Nc1ccc(O)cc1");
  const Explanation a = explain(t, m, "CC(=O)Nc1ccc(O)cc1", 5);
  const Explanation b = explain(t, m, "CC(=O)Nc1ccc(O)cc1", 5);
  EXPECT_EQ(a.narrative, b.narrative);
  EXPECT_EQ(to_json(a), to_json(b));
  EXPECT_NE(a.narrative.find("importance"), std::string::npos);
}

TEST(Explain, LlmReplayReturnsTheStoredNarrative) {
  const auto &r = Replay::get();
  const auto backend = make_backend(r.config);
  const Explanation e =
      explain(r.trained, mol::parse_smiles("CCO"), "CCO", 3, ExplainMode::kLlm, backend.get());
  EXPECT_EQ(e.generator, "llm");
  EXPECT_TRUE(e.notice.empty());
  EXPECT_EQ(e.narrative, test::read_file(fixture_path("replay/responses/explain.txt")));
}

TEST(Explain, LlmFailureFallsBackToTemplateWithNotice) {
  const auto &r = Replay::get();
  const auto backend = make_backend(r.config);  // no entry for this molecule
  const mol::Molecule m = mol::parse_smiles("c1ccccc1O");
  const Explanation e = explain(r.trained, m, "c1ccccc1O", 3, ExplainMode::kLlm, backend.get());
  EXPECT_EQ(e.generator, "template");
  EXPECT_NE(e.notice.find("replay miss"), std::string::npos);
  EXPECT_EQ(e.narrative, explain(r.trained, m, "c1ccccc1O", 3).narrative);
  const Explanation none = explain(r.trained, m, "c1ccccc1O", 3, ExplainMode::kLlm, nullptr);
  EXPECT_EQ(none.generator, "template");
  EXPECT_FALSE(none.notice.empty());
}

// ---- persistence --------------------------------------------------------

TEST(Persistence, SaveLoadRoundTrip) {
  const auto &r = Replay::get();
  TrainedTask t = r.trained;
  t.verdicts = run_validate_rules(t, r.data);
  const fs::path dir = scratch("persist") / "bbbp";
  save_trained(t, dir.string());
  for (const char *f: {"config.json", "ruleset.rules", "split.json", "model.json",
                       "importances.json", "metrics.json", "provenance.json", "verdicts.csv",
                       "verdicts.json"})
    EXPECT_TRUE(fs::exists(dir / f)) << f;
  const TrainedTask back = load_trained(dir.string());
  EXPECT_EQ(back.id, t.id);
  EXPECT_EQ(back.ruleset, t.ruleset);
  EXPECT_EQ(data::to_json(back.split), data::to_json(t.split));
  EXPECT_EQ(learn::model_hash(back.model), learn::model_hash(t.model));
  EXPECT_EQ(back.importances, t.importances);
  EXPECT_EQ(metrics_to_json(back), metrics_to_json(t));
  EXPECT_EQ(stats::verdicts_to_csv(back.verdicts), stats::verdicts_to_csv(t.verdicts));
  EXPECT_EQ(back.provenance.config_hash, t.provenance.config_hash);
  EXPECT_EQ(to_json(back.config), to_json(t.config));

  // Saving again gives identical files.
  const fs::path again = scratch("persist2") / "bbbp";
  save_trained(back, again.string());
  for (const char *f: {"ruleset.rules", "split.json", "model.json", "metrics.json", "verdicts.csv"})
    EXPECT_EQ(test::read_file((dir / f).string()), test::read_file((again / f).string())) << f;
}

TEST(Persistence, LoadRejectsInconsistentBundles) {
  const auto &r = Replay::get();
  const fs::path dir = scratch("broken") / "bbbp";
  save_trained(r.trained, dir.string());
  util::write_text_file((dir / "importances.json").string(), "[{\"rule_id\":\"x\",\"importance\":1}]");
  try {
    load_trained(dir.string());
    FAIL();
  } catch (const PipelineError &e) {
    EXPECT_EQ(e.code(), kExitData);
  }
  fs::remove(dir / "model.json");
  EXPECT_THROW(load_trained(dir.string()), PipelineError);
}

TEST(Summary, UnweightedMeanOverTasks) {
  const auto &r = Replay::get();
  TrainedTask a = r.trained, b = r.trained;
  a.id = "a";
  b.id = "b";
  a.metrics["test"].auc = 0.6;
  b.metrics["test"].auc = 0.9;
  const nlohmann::json s = summarize_tasks({a, b});
  EXPECT_EQ(s.at("metric"), "auc");
  EXPECT_NEAR(s.at("unweighted_mean").get<double>(), 0.75, 1e-12);
  EXPECT_EQ(s.at("tasks").size(), 2u);
  EXPECT_NE(s.at("aggregation").get<std::string>().find("unweighted"), std::string::npos);
}

// ---- service ------------------------------------------------------------

class ServiceTest: public ::testing::Test {
protected:
  static void SetUpTestSuite() {
    const auto &r = Replay::get();
    root_ = new fs::path(scratch("store"));
    TrainedTask t = r.trained;
    t.verdicts = run_validate_rules(t, r.data);
    save_trained(t, (*root_ / "bbbp").string());
    service_ = new Service(TaskStore::open(root_->string()));
    port_ = service_->start("127.0.0.1", 0);
  }
  static void TearDownTestSuite() {
    delete service_;
    delete root_;
  }

  httplib::Client client() const { return httplib::Client("127.0.0.1", port_); }

  static nlohmann::json post(const char *path, const nlohmann::json &body, int *status) {
    httplib::Client cli("127.0.0.1", port_);
    const auto res = cli.Post(path, body.dump(), "application/json");
    EXPECT_TRUE(res);
    *status = res ? res->status : 0;
    return res ? nlohmann::json::parse(res->body) : nlohmann::json();
  }

  static inline fs::path *root_ = nullptr;
  static inline Service *service_ = nullptr;
  static inline int port_ = 0;
};

TEST_F(ServiceTest, ListsTasks) {
  const auto res = client().Get("/tasks");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  const auto j = nlohmann::json::parse(res->body);
  ASSERT_EQ(j.at("tasks").size(), 1u);
  EXPECT_EQ(j["tasks"][0]["id"], "bbbp");
  EXPECT_EQ(j["tasks"][0]["kind"], "classification");
  EXPECT_TRUE(j["tasks"][0]["metrics"]["test"].contains("auc"));
}

TEST_F(ServiceTest, RulesCarryVerdicts) {
  const auto res = client().Get("/tasks/bbbp/rules");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  const auto j = nlohmann::json::parse(res->body);
  EXPECT_EQ(j["rules"].size(), Replay::get().trained.ruleset.rules.size());
  for (const auto &r: j["rules"]) {
    EXPECT_TRUE(r["verdict"].is_object());
    EXPECT_EQ(r["verdict"]["rule_id"], r["id"]);
  }
  EXPECT_EQ(client().Get("/tasks/nope/rules")->status, 404);
}

TEST_F(ServiceTest, PredictMatchesTheLibrary) {
  int status = 0;
  const auto j = post("/predict", {{"smiles", "CCO"}, {"task_id", "bbbp"}, {"k", 3}}, &status);
  EXPECT_EQ(status, 200);
  for (const char *f: {"prediction", "probability", "contributions", "explanation"})
    EXPECT_TRUE(j.contains(f)) << f;
  EXPECT_EQ(j["contributions"].size(), 3u);

  const auto &t = Replay::get().trained;
  for (const char *s: {"CCO", "c1ccccc1CCN", "OC(=O)c1ccccc1O", "CN1CCC[C@H]1c1cccnc1"}) {
    const auto got = post("/predict", {{"smiles", s}, {"task_id", "bbbp"}}, &status);
    ASSERT_EQ(status, 200) << s;
    const rules::FeatureMatrix fm = rules::featurize(t.ruleset, {mol::parse_smiles(s)});
    EXPECT_EQ(got["probability"].get<double>(), learn::predict(t.model, fm.row(0))) << s;
  }
}

TEST_F(ServiceTest, InvalidSmilesIs422WithDiagnostics) {
  int status = 0;
  const auto j = post("/predict", {{"smiles", "C1CC"}, {"task_id", "bbbp"}}, &status);
  EXPECT_EQ(status, 422);
  EXPECT_EQ(j["error"], "invalid_smiles");
  EXPECT_NE(j["message"].get<std::string>().find("unclosed ring"), std::string::npos);
  EXPECT_TRUE(j["position"].is_number());
}

TEST_F(ServiceTest, UnknownTaskAndBadRequests) {
  int status = 0;
  post("/predict", {{"smiles", "CCO"}, {"task_id", "nope"}}, &status);
  EXPECT_EQ(status, 404);
  post("/predict", {{"smiles", "CCO"}}, &status);
  EXPECT_EQ(status, 400);
  post("/predict", {{"smiles", "CCO"}, {"task_id", "bbbp"}, {"k", -1}}, &status);
  EXPECT_EQ(status, 400);
  const auto res = client().Post("/predict", "{not json", "application/json");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 400);
  post("/synthesize", {{"task_id", "nope"}}, &status);
  EXPECT_EQ(status, 404);
}

TEST_F(ServiceTest, SynthesisRunsAsAQueuedJob) {
  int status = 0;
  const auto queued = post("/synthesize", {{"task_id", "bbbp"}}, &status);
  EXPECT_EQ(status, 202);
  const auto queued2 = post("/infer", {{"task_id", "bbbp"}}, &status);
  EXPECT_EQ(status, 202);
  service_->drain_jobs();
  for (const auto &q: {queued, queued2}) {
    const auto res = client().Get("/jobs/" + q["job_id"].get<std::string>());
    ASSERT_TRUE(res);
    const auto j = nlohmann::json::parse(res->body);
    EXPECT_EQ(j["status"], "done") << j.dump();
  }
  EXPECT_EQ(rules::format_ruleset(rules::load_ruleset((*root_ / "bbbp" / "synthesis.rules").string())),
            rules::format_ruleset(Replay::get().syn));
  EXPECT_EQ(rules::format_ruleset(rules::load_ruleset((*root_ / "bbbp" / "inference.rules").string())),
            rules::format_ruleset(Replay::get().inf));
  EXPECT_EQ(client().Get("/jobs/job-999")->status, 404);
}

}  // namespace
}  // namespace llm4sd::pipeline
