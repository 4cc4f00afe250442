//
// Project llm4sd - Copyright 2026 The llm4sd Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "llm4sd/oracle/rules.hpp"

#include <algorithm>
#include <cctype>
#include <regex>
#include <set>
#include <sstream>

#include "llm4sd/data_files.hpp"

namespace llm4sd::oracle {

namespace {

std::string fold_space(std::string_view s) {
  std::string out;
  bool space = false;
  for (char c: s) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      space = !out.empty();
      continue;
    }
    if (space)
      out += ' ';
    space = false;
    out += c;
  }
  return out;
}

std::string strip_bold(std::string s) {
  for (std::size_t p; (p = s.find("**")) != std::string::npos;)
    s.erase(p, 2);
  return s;
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

bool word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

}  // namespace

std::vector<std::string> extract_rules(std::string_view response) {
  static const std::regex marker(
      R"(^\s*(?:\d+\s*[.):]|\(\d+\)|[-*+]|•|[Rr]ule\s*\d+\s*[:.)]?)\s+(.*)$)");
  std::vector<std::string> items;
  bool any_marker = false;
  bool open = false;  // an item is collecting continuation lines
  std::istringstream in{std::string(response)};
  std::string line;
  std::vector<std::string> all_lines;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r')
      line.pop_back();
    all_lines.push_back(line);
    std::string probe = line;
    const auto first = probe.find_first_not_of(" \t");
    if (first != std::string::npos && probe.compare(first, 2, "**") == 0)
      probe.erase(first, 2);
    std::smatch m;
    if (std::regex_match(probe, m, marker)) {
      any_marker = true;
      items.push_back(m[1].str());
      open = true;
    } else if (fold_space(line).empty()) {
      open = false;
    } else if (open) {
      items.back() += " " + line;
    }
  }
  if (!any_marker) {
    const std::string whole = fold_space(strip_bold(std::string(response)));
    return whole.empty() ? std::vector<std::string>{} : std::vector<std::string>{whole};
  }
  std::vector<std::string> out;
  for (const std::string &it: items) {
    std::string s = fold_space(strip_bold(it));
    if (!s.empty())
      out.push_back(std::move(s));
  }
  return out;
}

std::vector<std::string> summarize_rules(const std::vector<std::string> &rule_texts,
                                         Backend &backend) {
  const std::string response = backend.complete(build_summarize_prompt(rule_texts));
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (std::string &r: extract_rules(response))
    if (seen.insert(r).second)
      out.push_back(std::move(r));
  if (out.empty())
    throw OracleError(OracleErrorKind::kNoRules, "no rules extracted");
  return out;
}

// ---- registry -----------------------------------------------------------

PhraseRegistry PhraseRegistry::parse(std::string_view tsv) {
  PhraseRegistry reg;
  std::istringstream in{std::string(tsv)};
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
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0)
      throw std::invalid_argument("phrase registry line " + std::to_string(lineno)
                                  + ": expected phrase<TAB>dsl");
    try {
      reg.entries_.push_back({lower(line.substr(0, tab)), rules::parse_expr(line.substr(tab + 1))});
    } catch (const rules::RuleError &e) {
      throw std::invalid_argument("phrase registry line " + std::to_string(lineno) + ": "
                                  + e.what());
    }
  }
  return reg;
}

const PhraseRegistry &PhraseRegistry::bundled() {
  static const PhraseRegistry reg = parse(data_files::phrase_registry());
  return reg;
}

const Phrase *PhraseRegistry::match(std::string_view text) const {
  const std::string hay = lower(text);
  const Phrase *best = nullptr;
  for (const Phrase &p: entries_) {
    if (best && p.phrase.size() <= best->phrase.size())
      continue;
    for (std::size_t pos = hay.find(p.phrase); pos != std::string::npos;
         pos = hay.find(p.phrase, pos + 1)) {
      if (pos > 0 && word_char(hay[pos - 1]))
        continue;
      std::size_t end = pos + p.phrase.size();
      if (hay.compare(end, 2, "es") == 0 && (end + 2 == hay.size() || !word_char(hay[end + 2])))
        end += 2;
      else if (end < hay.size() && hay[end] == 's')
        ++end;
      if (end < hay.size() && word_char(hay[end]))
        continue;
      best = &p;
      break;
    }
  }
  return best;
}

std::string_view stage_name(TranscribeStage s) {
  switch (s) {
  case TranscribeStage::kRegistry:
    return "registry";
  case TranscribeStage::kLlm:
    return "llm";
  case TranscribeStage::kNone:
    return "none";
  }
  return "none";
}

Transcription transcribe(std::string_view rule_prose, const PhraseRegistry &registry,
                         Backend *llm) {
  Transcription t;
  if (const Phrase *p = registry.match(rule_prose)) {
    t.expr = p->expr;
    t.stage = TranscribeStage::kRegistry;
    return t;
  }
  if (!llm) {
    t.reason = "no registry phrase matches";
    return t;
  }
  std::string answer;
  try {
    answer = llm->complete(build_transcribe_prompt(rule_prose));
  } catch (const OracleError &e) {
    t.reason = std::string("no registry phrase matches; transcription request failed: ") + e.what();
    return t;
  }
  // First non-empty line outside code fences, without backticks.
  std::istringstream in(answer);
  std::string line, candidate;
  while (std::getline(in, line)) {
    if (line.rfind("```", 0) == 0)
      continue;
    line.erase(std::remove(line.begin(), line.end(), '`'), line.end());
    candidate = fold_space(line);
    if (!candidate.empty())
      break;
  }
  if (candidate.empty() || lower(candidate) == "none") {
    t.reason = "no registry phrase matches; the model gave no expression";
    return t;
  }
  try {
    t.expr = rules::parse_expr(candidate);
    t.stage = TranscribeStage::kLlm;
  } catch (const rules::RuleError &e) {
    t.reason = "no registry phrase matches; model output '" + candidate
               + "' does not parse: " + e.what();
  }
  return t;
}

}  // namespace llm4sd::oracle
