//
// Project llm4sd - Copyright 2026 The llm4sd Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef LLM4SD_RULEKIT_JSON_HPP_
#define LLM4SD_RULEKIT_JSON_HPP_

#include <json.hpp>

#include "llm4sd/rulekit/rule.hpp"

namespace llm4sd::rules {

// {"task": ..., "rules": [{"id", "provenance", "dsl", "value_kind",
//  "source_text", "transcribed", "reason"}]}
nlohmann::json ruleset_to_json(const RuleSet &rs);
RuleSet ruleset_from_json(const nlohmann::json &j);

}  // namespace llm4sd::rules

#endif  // LLM4SD_RULEKIT_JSON_HPP_
