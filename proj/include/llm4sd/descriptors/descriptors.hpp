//
// Project llm4sd - Copyright 2026 The llm4sd Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef LLM4SD_DESCRIPTORS_DESCRIPTORS_HPP_
#define LLM4SD_DESCRIPTORS_DESCRIPTORS_HPP_

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "llm4sd/molgraph/molecule.hpp"

namespace llm4sd::desc {

enum class ValueKind { kInteger, kReal };

struct DescriptorInfo {
  std::string name;
  std::string units;
  ValueKind kind;
  std::string summary;
};

/// What to do with atoms no contribution-table entry covers.
enum class CoveragePolicy { kZero, kError };

class DescriptorError: public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Registry in a fixed order. Names never change between releases.
const std::vector<DescriptorInfo> &list_descriptors();
const DescriptorInfo *find_descriptor(std::string_view name);

/// Throws DescriptorError for an unknown name, or for an uncovered atom
/// environment (tpsa, clogp) under CoveragePolicy::kError. Under kZero the
/// atom contributes 0 and a message is appended to `warnings` if given.
double compute(const mol::Molecule &m, std::string_view name,
               CoveragePolicy policy = CoveragePolicy::kZero,
               std::vector<std::string> *warnings = nullptr);

double molecular_weight(const mol::Molecule &m);
int heavy_atom_count(const mol::Molecule &m);
int hbond_donors(const mol::Molecule &m);
int hbond_acceptors(const mol::Molecule &m);
int rotatable_bonds(const mol::Molecule &m);
int aromatic_ring_count(const mol::Molecule &m);

/// Ertl topological polar surface area over N and O.
double tpsa(const mol::Molecule &m);

/// Wildman-Crippen atom-additive logP.
double clogp(const mol::Molecule &m,
             CoveragePolicy policy = CoveragePolicy::kZero,
             std::vector<std::string> *warnings = nullptr);

/// Per-atom Crippen contributions, hydrogens folded into their heavy atom.
/// `types`, when given, receives each atom's type id ("" when uncovered).
std::vector<double> clogp_contributions(const mol::Molecule &m,
                                        std::vector<std::string> *types = nullptr);

/// Radius-2 circular fingerprint folded to n_bits (a power of two).
class BitVector {
public:
  explicit BitVector(std::size_t n_bits = 0): bits_((n_bits + 63) / 64), n_(n_bits) { }

  std::size_t size() const { return n_; }
  bool test(std::size_t i) const { return (bits_[i / 64] >> (i % 64)) & 1U; }
  void set(std::size_t i) { bits_[i / 64] |= std::uint64_t{1} << (i % 64); }
  std::size_t count() const;
  const std::vector<std::uint64_t> &words() const { return bits_; }

  friend bool operator==(const BitVector &, const BitVector &) = default;

private:
  std::vector<std::uint64_t> bits_;
  std::size_t n_;
};

BitVector ecfp4(const mol::Molecule &m, std::size_t n_bits = 2048);

/// Jaccard similarity of set bits; 1.0 for two empty vectors.
double tanimoto(const BitVector &a, const BitVector &b);

}  // namespace llm4sd::desc

#endif  // LLM4SD_DESCRIPTORS_DESCRIPTORS_HPP_
