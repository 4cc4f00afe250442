//
// Project llm4sd - Copyright 2026 The llm4sd Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef LLM4SD_MOLGRAPH_CANONICAL_HPP_
#define LLM4SD_MOLGRAPH_CANONICAL_HPP_

#include <string>
#include <vector>

#include "llm4sd/molgraph/molecule.hpp"

namespace llm4sd::mol {

/// Canonical atom order: position of each atom in the canonical labeling.
std::vector<int> canonical_ranks(const Molecule &mol);

/// A string equal for isomorphic graphs (element, aromatic flag, charge,
/// isotope, hydrogen count, bond orders) and different otherwise. Not SMILES.
/// The empty molecule maps to "".
std::string canonical_key(const Molecule &mol);

}  // namespace llm4sd::mol

#endif  // LLM4SD_MOLGRAPH_CANONICAL_HPP_
