//
// Project llm4sd - Copyright 2026 The llm4sd Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef LLM4SD_PIPELINE_CONFIG_HPP_
#define LLM4SD_PIPELINE_CONFIG_HPP_

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "llm4sd/datasets/dataset.hpp"
#include "llm4sd/learners/forest.hpp"
#include "llm4sd/learners/linear.hpp"
#include "llm4sd/oracle/backend.hpp"

namespace llm4sd::pipeline {

/// Process exit codes of the command-line tool.
enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitData = 2, kExitOracle = 3 };

class PipelineError: public std::runtime_error {
public:
  PipelineError(ExitCode code, const std::string &message)
      : std::runtime_error(message), code_(code) { }
  ExitCode code() const { return code_; }

private:
  ExitCode code_;
};

enum class OracleMode { kLive, kReplay };
enum class ModelChoice { kForest, kLinear };

/// Everything a run depends on. Serialized as JSON; keys match the field
/// names below (nested objects for `forest`, `logistic` and `http`).
struct RunConfig {
  std::string task;          // task id from the task table
  std::string dataset_path;  // MoleculeNet-style CSV
  std::string smiles_column;  // empty: the manifest column, else "smiles"

  data::SplitMethod split = data::SplitMethod::kScaffold;
  data::Fractions fractions;
  std::uint64_t split_seed = 0;  // random split only

  OracleMode oracle_mode = OracleMode::kReplay;
  std::string transcript_path;  // replay source, or live transcript output
  oracle::HttpConfig http;

  bool synthesis = true;
  bool inference = true;
  std::vector<std::string> manual_rulesets;
  int synthesis_rules = 30;
  int inference_rules = 3;
  int batch_size = 25;
  int n_batches = 10;
  std::uint64_t batch_seed = 7;
  bool llm_transcribe = false;
  bool corrected_descriptions = false;

  ModelChoice model = ModelChoice::kForest;
  learn::ForestParams forest;
  learn::LogisticOptions logistic;
  std::uint64_t seed = 7;

  std::string output_dir = "runs";
};

nlohmann::json to_json(const RunConfig &c);
/// Missing keys keep their defaults; unknown keys are an error.
RunConfig config_from_json(const nlohmann::json &j, RunConfig base = {});
RunConfig load_config(const std::string &path);

/// Throws PipelineError(kExitUsage) when the configuration cannot run.
void validate(const RunConfig &c);

/// SHA-256 of the configuration JSON without secrets or output location.
std::string config_hash(const RunConfig &c);

/// The backend a configuration asks for; live transcripts are appended to
/// `transcript_path` when set.
std::unique_ptr<oracle::Backend> make_backend(const RunConfig &c);

}  // namespace llm4sd::pipeline

#endif  // LLM4SD_PIPELINE_CONFIG_HPP_
