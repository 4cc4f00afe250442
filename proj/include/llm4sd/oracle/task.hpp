//
// Project llm4sd - Copyright 2026 The llm4sd Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef LLM4SD_ORACLE_TASK_HPP_
#define LLM4SD_ORACLE_TASK_HPP_

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "llm4sd/learners/forest.hpp"

namespace llm4sd::oracle {

using learn::TaskKind;

inline constexpr std::string_view kDefaultPersona = "biologist/chemist";

struct TaskSpec {
  std::string id;            // e.g. "bbbp", "tox21-nr-ar", "qm9-mu"
  std::string dataset;       // manifest dataset name
  std::string label_column;  // column in the dataset CSV
  TaskKind kind = TaskKind::kClassification;
  std::string description;
  // Prepended with a space in the synthesis / inference prompt, or empty.
  std::string synthesis_prefix;
  std::string inference_prefix;
  std::string persona{kDefaultPersona};
  bool no_3d = false;
  // The published description is believed to belong to another task.
  bool description_swapped = false;
};

/// The bundled task table, in file order. Validated on first use.
const std::vector<TaskSpec> &tasks();
std::optional<TaskSpec> find_task(std::string_view id);

/// For a task flagged description_swapped, a copy carrying its partner's
/// description (FreeSolv <-> Lipophilicity); otherwise the task unchanged.
TaskSpec with_corrected_description(const TaskSpec &t);

}  // namespace llm4sd::oracle

#endif  // LLM4SD_ORACLE_TASK_HPP_
