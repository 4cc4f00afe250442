//
// Project llm4sd - Copyright 2026 The llm4sd Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef LLM4SD_ORACLE_RULES_HPP_
#define LLM4SD_ORACLE_RULES_HPP_

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "llm4sd/oracle/backend.hpp"
#include "llm4sd/rulekit/rule.hpp"

namespace llm4sd::oracle {

/// Splits a response on numbered ("1.", "2)", "(3)", "Rule 4:") or bulleted
/// ("-", "*", "+", "•") line markers. Unmarked lines continue the current
/// item until a blank line; text before the first marker is dropped. Text
/// with no markers at all is one item.
std::vector<std::string> extract_rules(std::string_view response);

/// Asks the backend to condense `rule_texts`, then removes exact duplicates
/// (after whitespace folding) keeping the first. Throws OracleError(kNoRules)
/// with "no rules extracted" when nothing survives.
std::vector<std::string> summarize_rules(const std::vector<std::string> &rule_texts,
                                         Backend &backend);

struct Phrase {
  std::string phrase;  // lowercase
  rules::Expr expr;
};

class PhraseRegistry {
public:
  /// `tsv`: `phrase<TAB>dsl` lines after a header; '#' starts a comment.
  static PhraseRegistry parse(std::string_view tsv);
  static const PhraseRegistry &bundled();

  /// Longest phrase occurring in `text` on word boundaries (an "s"/"es"
  /// plural is allowed); ties go to the earlier entry.
  const Phrase *match(std::string_view text) const;
  const std::vector<Phrase> &entries() const { return entries_; }

private:
  std::vector<Phrase> entries_;
};

enum class TranscribeStage { kRegistry, kLlm, kNone };
std::string_view stage_name(TranscribeStage s);

struct Transcription {
  std::optional<rules::Expr> expr;
  TranscribeStage stage = TranscribeStage::kNone;
  std::string reason;  // why transcription failed

  bool ok() const { return expr.has_value(); }
};

/// Registry first; if that misses and `llm` is given, one DSL-only request
/// whose answer must parse. Failure is returned, never thrown.
Transcription transcribe(std::string_view rule_prose, const PhraseRegistry &registry,
                         Backend *llm = nullptr);

}  // namespace llm4sd::oracle

#endif  // LLM4SD_ORACLE_RULES_HPP_
