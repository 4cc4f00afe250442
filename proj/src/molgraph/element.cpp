//
// Project llm4sd - Copyright 2026 The llm4sd Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "llm4sd/molgraph/element.hpp"

#include <charconv>
#include <sstream>
#include <stdexcept>

#include "llm4sd/data_files.hpp"

namespace llm4sd::mol {

const ElementTable &ElementTable::instance() {
  static const ElementTable table(data_files::elements());
  return table;
}

ElementTable::ElementTable(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#')
      continue;
    std::istringstream fields(line);
    Element e;
    std::string valences;
    if (!(fields >> e.symbol >> e.atomic_number >> e.mass >> valences))
      throw std::runtime_error("elements table: malformed line "
                               + std::to_string(lineno));
    if (valences != "-") {
      std::istringstream vs(valences);
      std::string v;
      while (std::getline(vs, v, ','))
        e.default_valences.push_back(std::stoi(v));
    }
    if (e.atomic_number >= static_cast<int>(by_number_.size()))
      by_number_.resize(e.atomic_number + 1, -1);
    by_number_[e.atomic_number] = static_cast<int>(elements_.size());
    elements_.push_back(std::move(e));
  }
}

const Element *ElementTable::find(std::string_view symbol) const {
  for (const Element &e: elements_)
    if (e.symbol == symbol)
      return &e;
  return nullptr;
}

const Element *ElementTable::find(int atomic_number) const {
  if (atomic_number < 0 || atomic_number >= static_cast<int>(by_number_.size())
      || by_number_[atomic_number] < 0)
    return nullptr;
  return &elements_[by_number_[atomic_number]];
}

const Element &ElementTable::at(int atomic_number) const {
  const Element *e = find(atomic_number);
  if (e == nullptr)
    throw std::out_of_range("no element with atomic number "
                            + std::to_string(atomic_number));
  return *e;
}

}  // namespace llm4sd::mol
