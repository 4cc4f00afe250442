//
// Project llm4sd - Copyright 2026 The llm4sd Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "llm4sd/pipeline/config.hpp"

#include <fstream>
#include <set>

#include "llm4sd/oracle/task.hpp"
#include "llm4sd/util/hash.hpp"

namespace llm4sd::pipeline {

namespace {

std::string_view mode_name(OracleMode m) { return m == OracleMode::kLive ? "live" : "replay"; }
std::string_view model_name(ModelChoice m) { return m == ModelChoice::kForest ? "forest" : "linear"; }

[[noreturn]] void usage(const std::string &msg) { throw PipelineError(kExitUsage, msg); }

void check_keys(const nlohmann::json &j, const std::set<std::string> &known, const char *where) {
  if (!j.is_object())
    usage(std::string("config: ") + where + " must be an object");
  for (const auto &[k, v]: j.items())
    if (!known.count(k))
      usage(std::string("config: unknown key '") + k + "' in " + where);
}

}  // namespace

nlohmann::json to_json(const RunConfig &c) {
  return {
      {"task", c.task},
      {"dataset_path", c.dataset_path},
      {"smiles_column", c.smiles_column},
      {"split", data::split_method_name(c.split)},
      {"fractions", {c.fractions.train, c.fractions.valid, c.fractions.test}},
      {"split_seed", c.split_seed},
      {"oracle_mode", mode_name(c.oracle_mode)},
      {"transcript_path", c.transcript_path},
      {"http",
       {{"base_url", c.http.base_url},
        {"path", c.http.path},
        {"model", c.http.model},
        {"temperature", c.http.temperature},
        {"max_tokens", c.http.max_tokens},
        {"timeout_seconds", c.http.timeout_seconds},
        {"max_attempts", c.http.max_attempts},
        {"initial_backoff_ms", c.http.initial_backoff.count()}}},
      {"synthesis", c.synthesis},
      {"inference", c.inference},
      {"manual_rulesets", c.manual_rulesets},
      {"synthesis_rules", c.synthesis_rules},
      {"inference_rules", c.inference_rules},
      {"batch_size", c.batch_size},
      {"n_batches", c.n_batches},
      {"batch_seed", c.batch_seed},
      {"llm_transcribe", c.llm_transcribe},
      {"corrected_descriptions", c.corrected_descriptions},
      {"model", model_name(c.model)},
      {"forest",
       {{"n_trees", c.forest.n_trees},
        {"max_depth", c.forest.max_depth},
        {"min_samples_leaf", c.forest.min_samples_leaf},
        {"max_features", c.forest.max_features},
        {"bootstrap", c.forest.bootstrap},
        {"threads", c.forest.threads}}},
      {"logistic",
       {{"l2", c.logistic.l2}, {"tolerance", c.logistic.tolerance}, {"max_iter", c.logistic.max_iter}}},
      {"seed", c.seed},
      {"output_dir", c.output_dir},
  };
}

RunConfig config_from_json(const nlohmann::json &j, RunConfig c) {
  check_keys(j,
             {"task", "dataset_path", "smiles_column", "split", "fractions", "split_seed",
              "oracle_mode", "transcript_path", "http", "synthesis", "inference",
              "manual_rulesets", "synthesis_rules", "inference_rules", "batch_size", "n_batches",
              "batch_seed", "llm_transcribe", "corrected_descriptions", "model", "forest",
              "logistic", "seed", "output_dir"},
             "config");
  try {
    const auto get = [&](const char *key, auto &field) {
      if (j.contains(key))
        field = j.at(key).get<std::decay_t<decltype(field)>>();
    };
    get("task", c.task);
    get("dataset_path", c.dataset_path);
    get("smiles_column", c.smiles_column);
    if (j.contains("split"))
      c.split = data::split_method_from_name(j.at("split").get<std::string>());
    if (j.contains("fractions")) {
      const auto f = j.at("fractions").get<std::vector<double>>();
      if (f.size() != 3)
        usage("config: fractions must list train, valid and test");
      c.fractions = {f[0], f[1], f[2]};
    }
    get("split_seed", c.split_seed);
    if (j.contains("oracle_mode")) {
      const std::string m = j.at("oracle_mode");
      if (m != "live" && m != "replay")
        usage("config: oracle_mode must be live or replay");
      c.oracle_mode = m == "live" ? OracleMode::kLive : OracleMode::kReplay;
    }
    get("transcript_path", c.transcript_path);
    if (j.contains("http")) {
      const auto &h = j.at("http");
      check_keys(h,
                 {"base_url", "path", "model", "temperature", "max_tokens", "timeout_seconds",
                  "max_attempts", "initial_backoff_ms"},
                 "http");
      if (h.contains("base_url"))
        c.http.base_url = h.at("base_url");
      if (h.contains("path"))
        c.http.path = h.at("path");
      if (h.contains("model"))
        c.http.model = h.at("model");
      if (h.contains("temperature"))
        c.http.temperature = h.at("temperature");
      if (h.contains("max_tokens"))
        c.http.max_tokens = h.at("max_tokens");
      if (h.contains("timeout_seconds"))
        c.http.timeout_seconds = h.at("timeout_seconds");
      if (h.contains("max_attempts"))
        c.http.max_attempts = h.at("max_attempts");
      if (h.contains("initial_backoff_ms"))
        c.http.initial_backoff = std::chrono::milliseconds(h.at("initial_backoff_ms").get<long long>());
    }
    get("synthesis", c.synthesis);
    get("inference", c.inference);
    get("manual_rulesets", c.manual_rulesets);
    get("synthesis_rules", c.synthesis_rules);
    get("inference_rules", c.inference_rules);
    get("batch_size", c.batch_size);
    get("n_batches", c.n_batches);
    get("batch_seed", c.batch_seed);
    get("llm_transcribe", c.llm_transcribe);
    get("corrected_descriptions", c.corrected_descriptions);
    if (j.contains("model")) {
      const std::string m = j.at("model");
      if (m != "forest" && m != "linear")
        usage("config: model must be forest or linear");
      c.model = m == "forest" ? ModelChoice::kForest : ModelChoice::kLinear;
    }
    if (j.contains("forest")) {
      const auto &f = j.at("forest");
      check_keys(f, {"n_trees", "max_depth", "min_samples_leaf", "max_features", "bootstrap", "threads"},
                 "forest");
      if (f.contains("n_trees"))
        c.forest.n_trees = f.at("n_trees");
      if (f.contains("max_depth"))
        c.forest.max_depth = f.at("max_depth");
      if (f.contains("min_samples_leaf"))
        c.forest.min_samples_leaf = f.at("min_samples_leaf");
      if (f.contains("max_features"))
        c.forest.max_features = f.at("max_features");
      if (f.contains("bootstrap"))
        c.forest.bootstrap = f.at("bootstrap");
      if (f.contains("threads"))
        c.forest.threads = f.at("threads");
    }
    if (j.contains("logistic")) {
      const auto &l = j.at("logistic");
      check_keys(l, {"l2", "tolerance", "max_iter"}, "logistic");
      if (l.contains("l2"))
        c.logistic.l2 = l.at("l2");
      if (l.contains("tolerance"))
        c.logistic.tolerance = l.at("tolerance");
      if (l.contains("max_iter"))
        c.logistic.max_iter = l.at("max_iter");
    }
    get("seed", c.seed);
    get("output_dir", c.output_dir);
  } catch (const nlohmann::json::exception &e) {
    usage(std::string("config: ") + e.what());
  } catch (const data::DataError &e) {
    usage(std::string("config: ") + e.what());
  }
  return c;
}

RunConfig load_config(const std::string &path) {
  std::ifstream in(path);
  if (!in)
    usage("cannot read config file " + path);
  try {
    return config_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error &e) {
    usage("config " + path + ": " + e.what());
  }
}

void validate(const RunConfig &c) {
  if (c.task.empty())
    usage("no task given");
  if (!oracle::find_task(c.task))
    usage("unknown task '" + c.task + "'");
  if (!c.synthesis && !c.inference && c.manual_rulesets.empty())
    usage("no rule source enabled: turn on synthesis or inference, or give a manual ruleset");
  if ((c.synthesis || c.inference) && c.oracle_mode == OracleMode::kReplay
      && c.transcript_path.empty())
    usage("replay mode needs a transcript path");
  if (c.synthesis_rules <= 0 || c.inference_rules <= 0 || c.batch_size <= 0 || c.n_batches <= 0)
    usage("rule counts, batch size and batch count must be positive");
  if (c.forest.n_trees <= 0)
    usage("forest needs at least one tree");
}

std::string config_hash(const RunConfig &c) {
  nlohmann::json j = to_json(c);
  j.erase("output_dir");
  return util::sha256_hex(j.dump());
}

std::unique_ptr<oracle::Backend> make_backend(const RunConfig &c) {
  if (c.oracle_mode == OracleMode::kReplay) {
    try {
      return std::make_unique<oracle::ReplayBackend>(oracle::ReplayBackend::from_file(c.transcript_path));
    } catch (const oracle::OracleError &e) {
      throw PipelineError(kExitOracle, e.what());
    }
  }
  oracle::HttpConfig h = c.http;
  oracle::apply_environment(h);
  std::shared_ptr<oracle::TranscriptWriter> writer;
  if (!c.transcript_path.empty())
    writer = std::make_shared<oracle::TranscriptWriter>(c.transcript_path);
  return std::make_unique<oracle::HttpBackend>(h, writer);
}

}  // namespace llm4sd::pipeline
