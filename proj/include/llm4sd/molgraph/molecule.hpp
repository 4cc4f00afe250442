//
// Project llm4sd - Copyright 2026 The llm4sd Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef LLM4SD_MOLGRAPH_MOLECULE_HPP_
#define LLM4SD_MOLGRAPH_MOLECULE_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace llm4sd::mol {

enum class BondOrder : std::uint8_t {
  kSingle = 1,
  kDouble = 2,
  kTriple = 3,
  kAromatic = 4,
};

/// Integer valence a bond contributes to each endpoint. Aromatic bonds count
/// as 1; the extra pi electron is accounted for when hydrogens are assigned.
constexpr int valence_contribution(BondOrder order) {
  return order == BondOrder::kAromatic ? 1 : static_cast<int>(order);
}

std::string_view bond_symbol(BondOrder order);

enum class ErrorKind {
  kSyntax,
  kUnclosedRing,
  kUnknownElement,
  kValence,
  kAromaticity,
  kUnsupported,
  kBudget,
};

std::string_view error_kind_name(ErrorKind kind);

/// Raised by the SMILES and pattern parsers and by graph validation.
/// `position()` is a 0-based offset into the source text when known.
class ParseError: public std::runtime_error {
public:
  ParseError(ErrorKind kind, std::string message,
             std::optional<std::size_t> position = std::nullopt);

  ErrorKind kind() const { return kind_; }
  std::optional<std::size_t> position() const { return position_; }
  const std::string &detail() const { return detail_; }

private:
  ErrorKind kind_;
  std::optional<std::size_t> position_;
  std::string detail_;
};

struct Atom {
  int atomic_number = 6;
  bool aromatic = false;
  int formal_charge = 0;
  // Present exactly for bracket atoms; organic-subset atoms get implicit
  // hydrogens from the default-valence table instead.
  std::optional<int> explicit_h;
  std::optional<int> isotope;
  int index = 0;

  std::string_view symbol() const;
  bool is_bracket() const { return explicit_h.has_value(); }
  bool is_hydrogen() const { return atomic_number == 1; }

  friend bool operator==(const Atom &, const Atom &) = default;
};

struct Bond {
  int begin = 0;
  int end = 0;
  BondOrder order = BondOrder::kSingle;

  int other(int atom) const { return atom == begin ? end : begin; }

  friend bool operator==(const Bond &, const Bond &) = default;
};

struct Neighbor {
  int atom;
  int bond;
};

/// Hydrogen-suppressed molecular graph. Instances are immutable once built;
/// every accessor is safe to call concurrently.
class Molecule {
public:
  Molecule() = default;

  /// Validates the graph, assigns implicit hydrogens and perceives rings.
  /// `atom_positions`, when given, maps atoms back to source offsets for
  /// error messages.
  static Molecule from_graph(std::vector<Atom> atoms, std::vector<Bond> bonds,
                             std::string source = {},
                             std::vector<std::size_t> atom_positions = {},
                             std::vector<std::string> warnings = {});

  const std::vector<Atom> &atoms() const { return atoms_; }
  const std::vector<Bond> &bonds() const { return bonds_; }
  const Atom &atom(int i) const { return atoms_[i]; }
  const Bond &bond(int i) const { return bonds_[i]; }
  std::size_t num_atoms() const { return atoms_.size(); }
  std::size_t num_bonds() const { return bonds_.size(); }
  bool empty() const { return atoms_.empty(); }

  std::span<const Neighbor> neighbors(int atom) const;
  std::optional<int> bond_between(int a, int b) const;

  int implicit_h(int atom) const { return implicit_h_[atom]; }
  int total_h(int atom) const;
  /// Number of neighbors that are not hydrogen atoms.
  int heavy_degree(int atom) const;

  /// Smallest set of smallest rings, each an ordered atom cycle.
  const std::vector<std::vector<int>> &rings() const { return rings_; }
  bool atom_in_ring(int atom) const { return ring_size_of_atom_[atom] > 0; }
  bool bond_in_ring(int bond) const { return bond_in_ring_[bond]; }
  bool atom_in_ring_of_size(int atom, int size) const;
  /// 0 when the atom is acyclic.
  int smallest_ring_size(int atom) const { return ring_size_of_atom_[atom]; }
  /// Ring indices (into rings()) that contain the bond.
  std::vector<int> rings_with_bond(int bond) const;

  int num_components() const { return num_components_; }
  /// Component id per atom, numbered in order of first appearance.
  const std::vector<int> &component_of() const { return component_; }

  const std::string &source() const { return source_; }
  const std::vector<std::string> &warnings() const { return warnings_; }

private:
  std::vector<Atom> atoms_;
  std::vector<Bond> bonds_;
  std::vector<std::size_t> adj_offset_;
  std::vector<Neighbor> adj_;
  std::vector<int> implicit_h_;
  std::vector<std::vector<int>> rings_;
  std::vector<std::vector<int>> ring_bonds_;
  std::vector<int> ring_size_of_atom_;
  std::vector<bool> bond_in_ring_;
  std::vector<int> component_;
  int num_components_ = 0;
  std::string source_;
  std::vector<std::string> warnings_;
};

/// Smallest-set-of-smallest-rings over an arbitrary graph. Returned as edge
/// index sets sorted ascending, in ring order of increasing size.
std::vector<std::vector<int>>
smallest_rings(int num_atoms, std::span<const Bond> bonds);

}  // namespace llm4sd::mol

#endif  // LLM4SD_MOLGRAPH_MOLECULE_HPP_
