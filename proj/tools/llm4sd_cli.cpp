//
// Project llm4sd - Copyright 2026 The llm4sd Authors.
// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end: synth, infer, train, validate, explain, serve,
// ablate. Settings come from an optional JSON config file; flags override it.

#include <cstdio>
#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "llm4sd/molgraph/smiles.hpp"
#include "llm4sd/pipeline/config.hpp"
#include "llm4sd/pipeline/pipeline.hpp"
#include "llm4sd/pipeline/service.hpp"
#include "llm4sd/rulekit/rule.hpp"
#include "llm4sd/stats/stats.hpp"
#include "llm4sd/util/csv.hpp"

namespace fs = std::filesystem;
using namespace llm4sd;
using pipeline::PipelineError;
using pipeline::RunConfig;

namespace {

struct Flags {
  std::string config_file;
  std::vector<std::string> tasks;
  std::string dataset, smiles_column, split, oracle, transcript, model, output;
  std::vector<std::string> rulesets;
  std::uint64_t split_seed = 0, batch_seed = 0, seed = 0;
  int batch_size = 0, n_batches = 0, trees = 0, threads = 0;
  bool no_synthesis = false, no_inference = false, llm_transcribe = false,
       corrected_descriptions = false;

  std::string id;
  bool fresh = false;
  std::string annotations;
  std::string smiles;
  std::size_t k = 3;
  std::string mode = "template";
  std::string host = "127.0.0.1";
  int port = 8080;
};

RunConfig build_config(const CLI::App &app, const Flags &f) {
  RunConfig c = f.config_file.empty() ? RunConfig{} : pipeline::load_config(f.config_file);
  const auto given = [&](const char *name) { return app.count(name) > 0; };
  if (!f.tasks.empty())
    c.task = f.tasks.front();
  if (given("--dataset"))
    c.dataset_path = f.dataset;
  if (given("--smiles-column"))
    c.smiles_column = f.smiles_column;
  if (given("--split")) {
    try {
      c.split = data::split_method_from_name(f.split);
    } catch (const data::DataError &e) {
      throw PipelineError(pipeline::kExitUsage, e.what());
    }
  }
  if (given("--split-seed"))
    c.split_seed = f.split_seed;
  if (given("--oracle"))
    c.oracle_mode = f.oracle == "live" ? pipeline::OracleMode::kLive : pipeline::OracleMode::kReplay;
  if (given("--transcript"))
    c.transcript_path = f.transcript;
  if (f.no_synthesis)
    c.synthesis = false;
  if (f.no_inference)
    c.inference = false;
  if (given("--ruleset"))
    c.manual_rulesets = f.rulesets;
  if (given("--batch-size"))
    c.batch_size = f.batch_size;
  if (given("--batches"))
    c.n_batches = f.n_batches;
  if (given("--batch-seed"))
    c.batch_seed = f.batch_seed;
  if (f.llm_transcribe)
    c.llm_transcribe = true;
  if (f.corrected_descriptions)
    c.corrected_descriptions = true;
  if (given("--model"))
    c.model = f.model == "linear" ? pipeline::ModelChoice::kLinear : pipeline::ModelChoice::kForest;
  if (given("--trees"))
    c.forest.n_trees = f.trees;
  if (given("--threads"))
    c.forest.threads = f.threads;
  if (given("--seed"))
    c.seed = f.seed;
  if (given("--output"))
    c.output_dir = f.output;
  return c;
}

std::string task_dir(const RunConfig &c, const std::string &id) {
  return (fs::path(c.output_dir) / (id.empty() ? c.task : id)).string();
}

void report_untranscribed(const rules::RuleSet &rs) {
  for (const rules::Rule &r: rs.rules)
    if (!r.transcribed())
      std::cerr << "untranscribed " << r.id << ": " << r.reason << "\n";
}

void print_json(const nlohmann::json &j) { std::cout << j.dump(2) << "\n"; }

rules::RuleSet phase_rules(const RunConfig &c, const pipeline::TaskData &data, const char *file,
                           bool fresh, oracle::Backend *&backend,
                           std::unique_ptr<oracle::Backend> &owned) {
  const fs::path path = fs::path(task_dir(c, {})) / file;
  if (!fresh && fs::exists(path))
    return rules::load_ruleset(path.string());
  if (!backend) {
    owned = pipeline::make_backend(c);
    backend = owned.get();
  }
  rules::RuleSet rs = std::string(file) == "synthesis.rules"
                          ? pipeline::run_synthesis(c, *backend)
                          : pipeline::run_inference(c, data, *backend);
  fs::create_directories(path.parent_path());
  rules::save_ruleset(rs, path.string());
  report_untranscribed(rs);
  return rs;
}

pipeline::TrainedTask train_one(const RunConfig &c, const Flags &f) {
  const pipeline::TaskData data = pipeline::load_task_data(c);
  oracle::Backend *backend = nullptr;
  std::unique_ptr<oracle::Backend> owned;
  std::vector<rules::RuleSet> sets;
  if (c.synthesis)
    sets.push_back(phase_rules(c, data, "synthesis.rules", f.fresh, backend, owned));
  if (c.inference)
    sets.push_back(phase_rules(c, data, "inference.rules", f.fresh, backend, owned));
  for (const std::string &p: c.manual_rulesets)
    sets.push_back(rules::load_ruleset(p));
  const rules::RuleSet combined = pipeline::combine_rulesets(sets, c.task);
  const std::string id = f.id.empty() ? c.task : f.id;
  pipeline::TrainedTask t = pipeline::run_train(c, data, combined, id);
  pipeline::save_trained(t, task_dir(c, id));
  return t;
}

int run(int argc, char **argv) {
  CLI::App app{"Rule synthesis, inference, training and explanation for molecular property tasks"};
  app.require_subcommand(1);
  app.fallthrough();
  Flags f;

  app.add_option("-c,--config", f.config_file, "JSON config file")->check(CLI::ExistingFile);
  app.add_option("-t,--task", f.tasks, "Task id (train accepts several)");
  app.add_option("-d,--dataset", f.dataset, "Dataset CSV");
  app.add_option("--smiles-column", f.smiles_column, "SMILES column name");
  app.add_option("--split", f.split, "Split method")->check(CLI::IsMember({"scaffold", "random"}));
  app.add_option("--split-seed", f.split_seed, "Seed of the random split");
  app.add_option("--oracle", f.oracle, "Oracle mode")->check(CLI::IsMember({"live", "replay"}));
  app.add_option("--transcript", f.transcript, "Transcript to replay from or append to");
  app.add_flag("--no-synthesis", f.no_synthesis, "Disable literature synthesis rules");
  app.add_flag("--no-inference", f.no_inference, "Disable data inference rules");
  app.add_option("--ruleset", f.rulesets, "Manual ruleset file (repeatable)");
  app.add_option("--batch-size", f.batch_size, "Inference batch size");
  app.add_option("--batches", f.n_batches, "Number of inference batches");
  app.add_option("--batch-seed", f.batch_seed, "Seed of inference batch sampling");
  app.add_flag("--llm-transcribe", f.llm_transcribe, "Ask the model to transcribe unmatched rules");
  app.add_flag("--corrected-descriptions", f.corrected_descriptions,
               "Use the corrected FreeSolv/Lipophilicity descriptions");
  app.add_option("--model", f.model, "Model")->check(CLI::IsMember({"forest", "linear"}));
  app.add_option("--trees", f.trees, "Forest size");
  app.add_option("--threads", f.threads, "Training threads (results do not depend on it)");
  app.add_option("--seed", f.seed, "Model seed");
  app.add_option("-o,--output", f.output, "Output directory (task store)");

  auto *synth = app.add_subcommand("synth", "Synthesize rules from the model's prior knowledge");
  auto *infer = app.add_subcommand("infer", "Infer rules from batches of training data");
  auto *train = app.add_subcommand("train", "Featurize with the rules and train a model");
  train->add_option("--id", f.id, "Trained task name (default: task id)");
  train->add_flag("--fresh", f.fresh, "Regenerate rules even if rule files exist");
  auto *validate = app.add_subcommand("validate", "Test each rule's association with the label");
  validate->add_option("--id", f.id, "Trained task name (default: task id)");
  validate->add_option("--annotations", f.annotations, "CSV: rule_id,supported,citation_note");
  auto *explain = app.add_subcommand("explain", "Predict and explain one molecule");
  explain->add_option("--id", f.id, "Trained task name (default: task id)");
  explain->add_option("-s,--smiles", f.smiles, "Molecule")->required();
  explain->add_option("-k", f.k, "Number of rules to show");
  explain->add_option("--mode", f.mode, "Narrative generator")
      ->check(CLI::IsMember({"template", "llm"}));
  auto *serve = app.add_subcommand("serve", "Serve trained tasks over HTTP");
  serve->add_option("--host", f.host, "Bind address");
  serve->add_option("--port", f.port, "Port");
  auto *ablate = app.add_subcommand("ablate", "Compare synthesis, inference and combined rules");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? pipeline::kExitOk : pipeline::kExitUsage;
  }

  RunConfig c = build_config(app, f);

  if (synth->parsed()) {
    pipeline::validate(c);
    const auto backend = pipeline::make_backend(c);
    const rules::RuleSet rs = pipeline::run_synthesis(c, *backend);
    const std::string path = (fs::path(task_dir(c, {})) / "synthesis.rules").string();
    fs::create_directories(fs::path(path).parent_path());
    rules::save_ruleset(rs, path);
    report_untranscribed(rs);
    std::cout << "wrote " << path << ": " << rs.active().size() << " of " << rs.rules.size()
              << " rules transcribed\n";
    return pipeline::kExitOk;
  }
  if (infer->parsed()) {
    pipeline::validate(c);
    const pipeline::TaskData data = pipeline::load_task_data(c);
    const auto backend = pipeline::make_backend(c);
    const rules::RuleSet rs = pipeline::run_inference(c, data, *backend);
    const std::string path = (fs::path(task_dir(c, {})) / "inference.rules").string();
    fs::create_directories(fs::path(path).parent_path());
    rules::save_ruleset(rs, path);
    report_untranscribed(rs);
    std::cout << "wrote " << path << ": " << rs.active().size() << " of " << rs.rules.size()
              << " rules transcribed\n";
    return pipeline::kExitOk;
  }
  if (train->parsed()) {
    if (f.tasks.size() > 1 && !f.id.empty())
      throw PipelineError(pipeline::kExitUsage, "--id names a single task");
    std::vector<pipeline::TrainedTask> done;
    for (const std::string &task: f.tasks.empty() ? std::vector<std::string>{c.task} : f.tasks) {
      RunConfig tc = c;
      tc.task = task;
      pipeline::validate(tc);
      done.push_back(train_one(tc, f));
      print_json(pipeline::metrics_to_json(done.back()));
    }
    if (done.size() > 1) {
      const nlohmann::json summary = pipeline::summarize_tasks(done);
      util::write_text_file((fs::path(c.output_dir) / "summary.json").string(), summary.dump(2) + "\n");
      print_json(summary);
    }
    return pipeline::kExitOk;
  }
  if (validate->parsed()) {
    pipeline::TrainedTask t = pipeline::load_trained(task_dir(c, f.id));
    const pipeline::TaskData data = pipeline::load_task_data(t.config);
    std::optional<std::vector<std::pair<std::string, stats::Annotation>>> notes;
    if (!f.annotations.empty()) {
      if (!fs::exists(f.annotations)) {
        std::cerr << "annotations file " << f.annotations
                  << " not found; literature support left unknown\n";
      } else {
        try {
          notes = stats::parse_annotations(util::read_text_file(f.annotations));
        } catch (const std::exception &e) {
          throw PipelineError(pipeline::kExitData, std::string("annotations: ") + e.what());
        }
      }
    }
    t.verdicts = pipeline::run_validate_rules(t, data, notes);
    pipeline::save_verdicts(t.verdicts, task_dir(c, f.id));
    std::cout << stats::verdicts_to_csv(t.verdicts);
    for (const auto &[cat, n]: pipeline::category_counts(t.verdicts))
      std::cerr << cat << ": " << n << "\n";
    return pipeline::kExitOk;
  }
  if (explain->parsed()) {
    const pipeline::TrainedTask t = pipeline::load_trained(task_dir(c, f.id));
    mol::Molecule m;
    try {
      m = mol::parse_smiles(f.smiles);
    } catch (const mol::ParseError &e) {
      throw PipelineError(pipeline::kExitData, std::string("invalid SMILES: ") + e.what());
    }
    std::unique_ptr<oracle::Backend> backend;
    const bool llm = f.mode == "llm";
    if (llm)
      backend = pipeline::make_backend(t.config);
    print_json(pipeline::to_json(pipeline::explain(
        t, m, f.smiles, f.k, llm ? pipeline::ExplainMode::kLlm : pipeline::ExplainMode::kTemplate,
        backend.get())));
    return pipeline::kExitOk;
  }
  if (serve->parsed()) {
    pipeline::Service svc(pipeline::TaskStore::open(c.output_dir));
    std::cerr << "serving " << c.output_dir << " on " << f.host << ":" << f.port << "\n";
    svc.run(f.host, f.port);
    return pipeline::kExitOk;
  }
  if (ablate->parsed()) {
    c.synthesis = c.inference = true;
    pipeline::validate(c);
    const auto backend = pipeline::make_backend(c);
    const nlohmann::json summary = pipeline::run_ablation(c, *backend);
    fs::create_directories(c.output_dir);
    util::write_text_file((fs::path(c.output_dir) / (c.task + "-ablation.json")).string(),
                          summary.dump(2) + "\n");
    print_json(summary);
    return pipeline::kExitOk;
  }
  return pipeline::kExitUsage;
}

}  // namespace

int main(int argc, char **argv) {
  try {
    return run(argc, argv);
  } catch (const PipelineError &e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.code();
  } catch (const oracle::OracleError &e) {
    std::cerr << "oracle error: " << e.what() << "\n";
    return pipeline::kExitOracle;
  } catch (const std::exception &e) {
    // Malformed rule files, CSV problems and the like.
    std::cerr << "error: " << e.what() << "\n";
    return pipeline::kExitData;
  }
}
