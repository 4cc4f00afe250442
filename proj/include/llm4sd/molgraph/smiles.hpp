//
// Project llm4sd - Copyright 2026 The llm4sd Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef LLM4SD_MOLGRAPH_SMILES_HPP_
#define LLM4SD_MOLGRAPH_SMILES_HPP_

#include <string_view>

#include "llm4sd/molgraph/molecule.hpp"

namespace llm4sd::mol {

/// Parses a SMILES string into a hydrogen-suppressed graph.
///
/// Supports the organic subset, bracket atoms (isotope, hydrogen count,
/// charge, atom class), branches, ring closures (including %nn) and
/// dot-separated components. Aromaticity is read from lowercase symbols and
/// is not re-perceived. Stereo marks (@, /, \) are accepted and dropped; each
/// drop is recorded in Molecule::warnings().
///
/// Throws ParseError carrying the offending offset.
Molecule parse_smiles(std::string_view text);

}  // namespace llm4sd::mol

#endif  // LLM4SD_MOLGRAPH_SMILES_HPP_
