//
// Project llm4sd - Copyright 2026 The llm4sd Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef LLM4SD_MOLGRAPH_PATTERN_HPP_
#define LLM4SD_MOLGRAPH_PATTERN_HPP_

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "llm4sd/molgraph/molecule.hpp"

namespace llm4sd::mol {

inline constexpr std::size_t kMaxPatternAtoms = 32;

struct PatternAtom {
  std::optional<int> atomic_number;  // empty = any element
  std::optional<bool> aromatic;      // empty = either
  std::optional<int> formal_charge;
  std::optional<int> total_h;

  bool matches(const Molecule &mol, int atom) const;
};

enum class BondQuery {
  kSingleOrAromatic,  // unwritten bond
  kSingle,
  kDouble,
  kTriple,
  kAromatic,
  kAny,
};

struct PatternBond {
  int begin = 0;
  int end = 0;
  BondQuery query = BondQuery::kSingleOrAromatic;

  bool matches(BondOrder order) const;
};

/// A connected query graph over the SMARTS-lite subset.
struct Pattern {
  std::vector<PatternAtom> atoms;
  std::vector<PatternBond> bonds;
  std::string source;
};

/// SMARTS-lite: element symbols (organic subset unbracketed, any element in
/// brackets), lowercase aromatic atoms, `*`, `A`, `a`, `[#n]`, bracket charge
/// and hydrogen count, bonds `- = # : ~`, branches and ring closures.
/// Recursion, logical operators, stereo marks and other primitives throw
/// ParseError(kUnsupported) naming the construct.
Pattern parse_pattern(std::string_view text);

enum class MatchMode {
  kAll,           // every injective mapping
  kUniqueAtoms,   // one mapping per distinct matched atom set
};

/// Returns mappings indexed by pattern atom. Throws ParseError(kBudget) for
/// patterns above kMaxPatternAtoms.
std::vector<std::vector<int>> match_pattern(const Molecule &mol,
                                            const Pattern &pattern,
                                            MatchMode mode = MatchMode::kAll);

/// Number of distinct matched atom sets.
std::size_t count_matches(const Molecule &mol, const Pattern &pattern);

bool has_match(const Molecule &mol, const Pattern &pattern);

}  // namespace llm4sd::mol

#endif  // LLM4SD_MOLGRAPH_PATTERN_HPP_
