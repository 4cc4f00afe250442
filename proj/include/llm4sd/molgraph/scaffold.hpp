//
// Project llm4sd - Copyright 2026 The llm4sd Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef LLM4SD_MOLGRAPH_SCAFFOLD_HPP_
#define LLM4SD_MOLGRAPH_SCAFFOLD_HPP_

#include "llm4sd/molgraph/molecule.hpp"

namespace llm4sd::mol {

/// Bemis-Murcko framework: ring atoms plus the linker atoms on paths between
/// rings. Side chains, including exocyclic double-bonded atoms, are removed
/// and organic-subset atoms get their hydrogens recomputed. Acyclic input
/// gives an empty molecule.
Molecule murcko_scaffold(const Molecule &mol);

}  // namespace llm4sd::mol

#endif  // LLM4SD_MOLGRAPH_SCAFFOLD_HPP_
