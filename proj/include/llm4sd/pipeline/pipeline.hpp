//
// Project llm4sd - Copyright 2026 The llm4sd Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef LLM4SD_PIPELINE_PIPELINE_HPP_
#define LLM4SD_PIPELINE_PIPELINE_HPP_

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "llm4sd/datasets/dataset.hpp"
#include "llm4sd/learners/model.hpp"
#include "llm4sd/oracle/backend.hpp"
#include "llm4sd/oracle/rules.hpp"
#include "llm4sd/oracle/task.hpp"
#include "llm4sd/pipeline/config.hpp"
#include "llm4sd/rulekit/rule.hpp"
#include "llm4sd/stats/stats.hpp"

namespace llm4sd::pipeline {

/// The task, its dataset restricted to the task's label, and the split.
struct TaskData {
  oracle::TaskSpec task;
  data::Dataset dataset;
  data::Split split;
};

/// Loads the dataset named by the config and splits it. Data problems raise
/// PipelineError(kExitData).
TaskData load_task_data(const RunConfig &c);

/// The task spec after applying `corrected_descriptions`.
oracle::TaskSpec resolve_task(const RunConfig &c);

/// Synthesis phase. The returned set keeps untranscribed rules (with their
/// reasons); it fails with kExitOracle when nothing could be transcribed.
rules::RuleSet run_synthesis(const RunConfig &c, oracle::Backend &backend,
                             const oracle::PhraseRegistry &registry
                             = oracle::PhraseRegistry::bundled());

/// Inference phase over batches sampled from the training partition.
rules::RuleSet run_inference(const RunConfig &c, const TaskData &data, oracle::Backend &backend,
                             const oracle::PhraseRegistry &registry
                             = oracle::PhraseRegistry::bundled());

/// Concatenates the transcribed rules of each set; a rule whose expression
/// equals an earlier one is dropped.
rules::RuleSet combine_rulesets(const std::vector<rules::RuleSet> &sets, const std::string &task);

struct PartitionMetrics {
  std::size_t n = 0;
  std::optional<double> auc;   // classification
  std::optional<double> rmse;  // regression
  std::optional<double> mae;
  std::string note;            // why a metric is missing
};

struct Provenance {
  std::string config_hash;
  std::string transcript_path;
  std::string transcript_hash;  // SHA-256 of the transcript bytes, or empty
  std::string dataset_path;
  std::string dataset_checksum;
  std::string model_hash;
};

struct TrainedTask {
  std::string id;  // store key; the task id or an ablation variant
  RunConfig config;
  rules::RuleSet ruleset;  // transcribed rules only, one per feature column
  data::Split split;
  learn::Model model;
  std::vector<double> importances;  // one per rule
  std::map<std::string, PartitionMetrics> metrics;  // "train", "valid", "test"
  std::vector<stats::RuleVerdict> verdicts;          // empty until validated
  Provenance provenance;

  learn::TaskKind kind() const;
};

/// Featurizes the three partitions, fits the configured model and scores it.
TrainedTask run_train(const RunConfig &c, const TaskData &data, const rules::RuleSet &ruleset,
                      std::string id = {});

/// One verdict per rule, testing the training rows. Without annotations
/// every verdict has unknown literature support.
std::vector<stats::RuleVerdict> run_validate_rules(
    const TrainedTask &t, const TaskData &data,
    const std::optional<std::vector<std::pair<std::string, stats::Annotation>>> &annotations
    = std::nullopt);

std::map<std::string, std::size_t> category_counts(const std::vector<stats::RuleVerdict> &v);

// ---- explanation --------------------------------------------------------

enum class ExplainMode { kTemplate, kLlm };

struct Contribution {
  std::string rule_id;
  std::string expr;         // DSL
  std::string source_text;  // rule prose
  double value = 0.0;
  double importance = 0.0;
};

struct Explanation {
  std::string smiles;
  double prediction = 0.0;  // class (0/1) or regression value
  std::optional<double> probability;
  std::vector<Contribution> contributions;  // importance descending
  std::string narrative;
  std::string generator;  // "template" or "llm"
  std::string notice;     // set when llm mode fell back to the template
};

/// Prediction without explanation text, as served by the HTTP API.
struct Prediction {
  std::vector<double> features;
  double raw = 0.0;  // model output: P(class 1) or the regression value
};
Prediction predict_molecule(const TrainedTask &t, const mol::Molecule &m);

/// `k` is clamped to the ruleset size. `backend` is needed in llm mode;
/// without one, or when it fails, the template text is used with a notice.
Explanation explain(const TrainedTask &t, const mol::Molecule &m, std::string smiles,
                    std::size_t k, ExplainMode mode = ExplainMode::kTemplate,
                    oracle::Backend *backend = nullptr);

nlohmann::json to_json(const Explanation &e);
nlohmann::json to_json(const PartitionMetrics &m);
nlohmann::json metrics_to_json(const TrainedTask &t);
nlohmann::json verdicts_to_json(const std::vector<stats::RuleVerdict> &v);

// ---- persistence --------------------------------------------------------

/// Writes config.json, ruleset.rules, split.json, model.json,
/// importances.json, metrics.json, provenance.json and, once validated,
/// verdicts.csv / verdicts.json into `dir`.
void save_trained(const TrainedTask &t, const std::string &dir);
void save_verdicts(const std::vector<stats::RuleVerdict> &v, const std::string &dir);
TrainedTask load_trained(const std::string &dir);

/// SHA-256 of a file's bytes, or empty when it cannot be read.
std::string file_sha256(const std::string &path);

/// Runs the three rule-source variants (synthesis only, inference only,
/// combined) plus an ECFP4 forest baseline and returns a summary document.
/// Each variant is saved under `<output_dir>/<task>-<variant>`.
nlohmann::json run_ablation(const RunConfig &c, oracle::Backend &backend);

/// Per-task test metrics plus their unweighted mean.
nlohmann::json summarize_tasks(const std::vector<TrainedTask> &tasks);

}  // namespace llm4sd::pipeline

#endif  // LLM4SD_PIPELINE_PIPELINE_HPP_
