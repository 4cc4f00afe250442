//
// Project llm4sd - Copyright 2026 The llm4sd Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef LLM4SD_MOLGRAPH_ELEMENT_HPP_
#define LLM4SD_MOLGRAPH_ELEMENT_HPP_

#include <string>
#include <string_view>
#include <vector>

namespace llm4sd::mol {

struct Element {
  std::string symbol;
  int atomic_number = 0;
  double mass = 0.0;
  // Empty for elements that may only appear in bracket atoms.
  std::vector<int> default_valences;
};

/// Element lookup backed by data/elements.txt. The table is parsed once and
/// is immutable afterwards.
class ElementTable {
public:
  static const ElementTable &instance();

  const Element *find(std::string_view symbol) const;
  const Element *find(int atomic_number) const;
  const Element &at(int atomic_number) const;

  const std::vector<Element> &elements() const { return elements_; }

private:
  explicit ElementTable(std::string_view text);

  std::vector<Element> elements_;
  std::vector<int> by_number_;
};

}  // namespace llm4sd::mol

#endif  // LLM4SD_MOLGRAPH_ELEMENT_HPP_
