//
// Project llm4sd - Copyright 2026 The llm4sd Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "llm4sd/oracle/task.hpp"

#include <sstream>
#include <stdexcept>

#include "llm4sd/data_files.hpp"

namespace llm4sd::oracle {

namespace {

std::vector<std::string> split_tabs(const std::string &line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t tab = line.find('\t', start);
    out.push_back(line.substr(start, tab == std::string::npos ? std::string::npos : tab - start));
    if (tab == std::string::npos)
      return out;
    start = tab + 1;
  }
}

std::string dash_empty(const std::string &s) { return s == "-" ? std::string() : s; }

std::vector<TaskSpec> load() {
  std::vector<TaskSpec> out;
  std::istringstream in{std::string(data_files::tasks())};
  std::string line;
  bool header = true;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#')
      continue;
    if (header) {
      header = false;
      continue;
    }
    const auto f = split_tabs(line);
    const auto bad = [&](const std::string &why) {
      return std::logic_error("tasks table line " + std::to_string(lineno) + ": " + why);
    };
    if (f.size() != 9)
      throw bad("expected 9 fields");
    TaskSpec t;
    t.id = f[0];
    t.dataset = f[1];
    t.label_column = f[2];
    t.kind = learn::task_kind_from_name(f[3]);
    t.no_3d = f[4] == "1";
    t.synthesis_prefix = dash_empty(f[5]);
    t.inference_prefix = dash_empty(f[6]);
    t.description_swapped = f[7] == "swapped_description";
    t.description = f[8];
    if (t.description.empty())
      throw bad("empty description");
    if (t.no_3d && t.kind != TaskKind::kRegression)
      throw bad("no_3d is only valid for regression tasks");
    out.push_back(std::move(t));
  }
  return out;
}

}  // namespace

const std::vector<TaskSpec> &tasks() {
  static const std::vector<TaskSpec> table = load();
  return table;
}

std::optional<TaskSpec> find_task(std::string_view id) {
  for (const TaskSpec &t: tasks())
    if (t.id == id)
      return t;
  return std::nullopt;
}

TaskSpec with_corrected_description(const TaskSpec &t) {
  if (!t.description_swapped)
    return t;
  const std::string partner = t.id == "freesolv" ? "lipophilicity" : "freesolv";
  TaskSpec out = t;
  if (const auto p = find_task(partner))
    out.description = p->description;
  out.description_swapped = false;
  return out;
}

}  // namespace llm4sd::oracle
