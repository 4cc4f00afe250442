//
// Project llm4sd - Copyright 2026 The llm4sd Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "llm4sd/oracle/prompts.hpp"

#include <cstdio>

#include "llm4sd/descriptors/descriptors.hpp"

namespace llm4sd::oracle {

namespace {

constexpr std::string_view kNo3d = " (without access to 3D information)";

// The published inference template capitalizes "Chemist" in the
// classification variant only.
std::string persona(const TaskSpec &t, bool capital_second) {
  if (t.persona == kDefaultPersona && capital_second)
    return "biologist/Chemist";
  return t.persona;
}

std::string with_prefix(const std::string &prefix, const std::string &desc) {
  return prefix.empty() ? desc : prefix + " " + desc;
}

// Appends ". " unless the description already ends a sentence.
std::string sentence(const std::string &s) {
  return !s.empty() && s.back() == '.' ? s : s + ".";
}

std::string format_label(const TaskSpec &t, double v) {
  if (t.kind == TaskKind::kClassification)
    return v == 1.0 ? "1" : "0";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

}  // namespace

std::string_view purpose_name(Purpose p) {
  switch (p) {
  case Purpose::kSynthesis:
    return "synthesis";
  case Purpose::kInference:
    return "inference";
  case Purpose::kSummarize:
    return "summarize";
  case Purpose::kTranscribe:
    return "transcribe";
  case Purpose::kExplain:
    return "explain";
  }
  return "synthesis";
}

Prompt build_synthesis_prompt(const TaskSpec &task, int rule_count) {
  if (rule_count <= 0)
    throw PromptError("rule count must be positive");
  std::string text = "Assumed you are an experienced " + persona(task, false)
                     + ". Please come up with " + std::to_string(rule_count)
                     + " rules that you think are very important to predict "
                     + sentence(with_prefix(task.synthesis_prefix, task.description))
                     + " Each rule is either about the structure or property of a molecule";
  if (task.no_3d)
    text += kNo3d;
  text += ".";
  return {std::move(text), Purpose::kSynthesis, "rules=" + std::to_string(rule_count)};
}

Prompt build_inference_prompt(const TaskSpec &task, const std::vector<LabeledInstance> &batch,
                              int rule_count) {
  if (batch.empty())
    throw PromptError("inference batch is empty");
  if (rule_count <= 0)
    throw PromptError("rule count must be positive");
  const std::string desc = with_prefix(task.inference_prefix, task.description);
  std::string text;
  if (task.kind == TaskKind::kClassification) {
    text = "Assume you are a very experienced " + persona(task, true)
           + ". In the following data, with label 1, it means " + sentence(desc)
           + " With label 0, it means it is not.";
  } else {
    text = "Assume you are a very experienced " + persona(task, false)
           + ". The following data includes molecules and their corresponding value "
           + sentence(desc);
  }
  text += " Please infer step-by-step to come up with " + std::to_string(rule_count)
          + " rules that directly relate the properties/structures of a molecule";
  if (task.no_3d)
    text += kNo3d;
  text += ".";
  for (const LabeledInstance &inst: batch) {
    if (task.kind == TaskKind::kClassification && inst.label != 0.0 && inst.label != 1.0)
      throw PromptError("classification label must be 0 or 1");
    text += "\n" + inst.smiles + " " + format_label(task, inst.label);
  }
  return {std::move(text), Purpose::kInference, "batch=" + std::to_string(batch.size())};
}

Prompt build_summarize_prompt(const std::vector<std::string> &rule_texts) {
  if (rule_texts.empty())
    throw PromptError("nothing to summarize");
  std::string text =
      "The rules below were proposed for one molecular property prediction task. Merge rules "
      "that say the same thing, drop repeats, and keep every distinct rule. Reply with a "
      "numbered list, one rule per line, and nothing else.";
  for (std::size_t i = 0; i < rule_texts.size(); ++i)
    text += "\n" + std::to_string(i + 1) + ". " + rule_texts[i];
  return {std::move(text), Purpose::kSummarize, "rules=" + std::to_string(rule_texts.size())};
}

Prompt build_transcribe_prompt(std::string_view rule_prose) {
  std::string names;
  for (const auto &d: desc::list_descriptors())
    names += (names.empty() ? "" : ", ") + d.name;
  std::string text =
      "Rewrite the molecular rule below as one feature expression. Reply with the expression "
      "only.\nGrammar: desc(NAME) | count(SMARTS) | has(SMARTS) | NUMBER * expr | expr + expr "
      "| expr - expr | expr / expr | (expr)\nDescriptor names: "
      + names + "\nRule: " + std::string(rule_prose);
  return {std::move(text), Purpose::kTranscribe, ""};
}

Prompt build_explain_prompt(const ExplainInput &in) {
  std::string text = "A model trained on interpretable rules predicted " + in.prediction
                     + " for the molecule " + in.smiles + ". Task: " + in.task_description
                     + "\nMost important rules, with the molecule's value and the rule's "
                       "importance:";
  char buf[64];
  for (const auto &it: in.items) {
    std::snprintf(buf, sizeof buf, " = %.4g (importance %.1f%%)", it.value, 100.0 * it.importance);
    text += "\n- " + it.rule + buf;
  }
  text += "\nExplain in a short paragraph, for a chemist, how these rules support the "
          "prediction.";
  return {std::move(text), Purpose::kExplain, "k=" + std::to_string(in.items.size())};
}

}  // namespace llm4sd::oracle
