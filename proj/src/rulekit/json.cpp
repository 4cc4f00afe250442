//
// Project llm4sd - Copyright 2026 The llm4sd Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "llm4sd/rulekit/json.hpp"

namespace llm4sd::rules {

nlohmann::json ruleset_to_json(const RuleSet &rs) {
  nlohmann::json rules = nlohmann::json::array();
  for (const Rule &r: rs.rules) {
    nlohmann::json j = {
        {"id", r.id},
        {"provenance", provenance_name(r.provenance)},
        {"source_text", r.source_text},
        {"transcribed", r.transcribed()},
    };
    if (r.expr) {
      j["dsl"] = to_string(*r.expr);
      j["value_kind"] = value_kind_name(r.expr->value_kind());
    } else {
      j["dsl"] = nullptr;
      j["value_kind"] = nullptr;
      j["reason"] = r.reason;
    }
    rules.push_back(std::move(j));
  }
  return {{"task", rs.task}, {"rules", std::move(rules)}};
}

RuleSet ruleset_from_json(const nlohmann::json &j) {
  RuleSet rs;
  try {
    rs.task = j.at("task").get<std::string>();
    for (const nlohmann::json &jr: j.at("rules")) {
      Rule r;
      r.id = jr.at("id").get<std::string>();
      const auto prov = provenance_from_name(jr.at("provenance").get<std::string>());
      if (!prov)
        throw RuleError(RuleErrorKind::kFile, "rule '" + r.id + "': unknown provenance");
      r.provenance = *prov;
      r.source_text = jr.value("source_text", "");
      if (jr.contains("dsl") && jr["dsl"].is_string())
        r.expr = parse_expr(jr["dsl"].get<std::string>());
      else
        r.reason = jr.value("reason", "");
      rs.rules.push_back(std::move(r));
    }
  } catch (const nlohmann::json::exception &e) {
    throw RuleError(RuleErrorKind::kFile, std::string("ruleset json: ") + e.what());
  }
  check_unique_ids(rs);
  return rs;
}

}  // namespace llm4sd::rules
