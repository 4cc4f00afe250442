//
// Project llm4sd - Copyright 2026 The llm4sd Authors.
// SPDX-License-Identifier: Apache-2.0
//
// Builds a replay transcript from hand-written responses. The pipeline runs
// against a scripted backend, so every recorded prompt is exactly the one a
// later replay will send.
//
//   make_replay_fixture --config cfg.json --responses dir --out transcript.jsonl
//       [--explain SMILES]...
//
// dir holds synthesis.txt, inference_NN.txt (one per batch), summarize.txt
// and explain.txt.

#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "llm4sd/molgraph/smiles.hpp"
#include "llm4sd/pipeline/config.hpp"
#include "llm4sd/pipeline/pipeline.hpp"
#include "llm4sd/util/csv.hpp"

namespace fs = std::filesystem;
using namespace llm4sd;

int main(int argc, char **argv) {
  CLI::App app{"Write a replay transcript from authored responses"};
  std::string config_path, responses, out, timestamp = "2026-01-01T00:00:00Z";
  std::vector<std::string> explain_smiles;
  std::size_t k = 3;
  app.add_option("--config", config_path)->required()->check(CLI::ExistingFile);
  app.add_option("--responses", responses)->required()->check(CLI::ExistingDirectory);
  app.add_option("--out", out)->required();
  app.add_option("--explain", explain_smiles, "Molecules whose llm explanation is recorded");
  app.add_option("-k", k);
  app.add_option("--timestamp", timestamp);
  CLI11_PARSE(app, argc, argv);

  try {
    pipeline::RunConfig c = pipeline::load_config(config_path);
    const auto read = [&](const std::string &name) {
      return util::read_text_file((fs::path(responses) / name).string());
    };
    int inference_calls = 0;
    fs::remove(out);
    auto writer = std::make_shared<oracle::TranscriptWriter>(out);
    oracle::FunctionBackend backend(
        [&](const oracle::Prompt &p) -> std::string {
          switch (p.purpose) {
          case oracle::Purpose::kSynthesis:
            return read("synthesis.txt");
          case oracle::Purpose::kInference: {
            char name[32];
            std::snprintf(name, sizeof name, "inference_%02d.txt", ++inference_calls);
            return read(name);
          }
          case oracle::Purpose::kSummarize:
            return read("summarize.txt");
          case oracle::Purpose::kExplain:
            return read("explain.txt");
          case oracle::Purpose::kTranscribe:
            return "none";
          }
          return {};
        },
        "authored", writer, [&] { return timestamp; });

    const pipeline::TaskData data = pipeline::load_task_data(c);
    const rules::RuleSet syn = pipeline::run_synthesis(c, backend);
    const rules::RuleSet inf = pipeline::run_inference(c, data, backend);
    std::cerr << "synthesis: " << syn.active().size() << "/" << syn.rules.size()
              << " transcribed; inference: " << inf.active().size() << "/" << inf.rules.size()
              << " transcribed\n";
    if (!explain_smiles.empty()) {
      // The explanation prompt depends on the trained importances, which do
      // not depend on the transcript path.
      c.transcript_path.clear();
      const pipeline::TrainedTask t =
          pipeline::run_train(c, data, pipeline::combine_rulesets({syn, inf}, c.task));
      for (const std::string &s: explain_smiles) {
        const pipeline::Explanation e = pipeline::explain(t, mol::parse_smiles(s), s, k,
                                                          pipeline::ExplainMode::kLlm, &backend);
        std::cerr << "explain " << s << ": " << e.generator << "\n";
      }
    }
    std::cerr << "wrote " << out << "\n";
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
