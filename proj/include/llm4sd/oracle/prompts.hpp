//
// Project llm4sd - Copyright 2026 The llm4sd Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef LLM4SD_ORACLE_PROMPTS_HPP_
#define LLM4SD_ORACLE_PROMPTS_HPP_

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "llm4sd/oracle/task.hpp"

namespace llm4sd::oracle {

enum class Purpose { kSynthesis, kInference, kSummarize, kTranscribe, kExplain };
std::string_view purpose_name(Purpose p);

struct Prompt {
  std::string text;
  Purpose purpose = Purpose::kSynthesis;
  std::string params;  // e.g. "rules=30", "batch=25"
};

class PromptError: public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

struct LabeledInstance {
  std::string smiles;
  double label = 0.0;
};

inline constexpr int kSynthesisRules = 30;
inline constexpr int kInferenceRules = 3;

Prompt build_synthesis_prompt(const TaskSpec &task, int rule_count = kSynthesisRules);

/// Template head, then one "SMILES label" line per instance. Classification
/// labels print as 0/1, regression values with up to 6 significant digits.
Prompt build_inference_prompt(const TaskSpec &task, const std::vector<LabeledInstance> &batch,
                              int rule_count = kInferenceRules);

Prompt build_summarize_prompt(const std::vector<std::string> &rule_texts);

/// Asks for a single DSL expression for one prose rule.
Prompt build_transcribe_prompt(std::string_view rule_prose);

struct ExplainInput {
  std::string smiles;
  std::string task_description;
  std::string prediction;  // already formatted
  // (rule text, feature value, importance), most important first.
  struct Item {
    std::string rule;
    double value = 0.0;
    double importance = 0.0;
  };
  std::vector<Item> items;
};

Prompt build_explain_prompt(const ExplainInput &in);

}  // namespace llm4sd::oracle

#endif  // LLM4SD_ORACLE_PROMPTS_HPP_
