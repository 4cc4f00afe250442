//
// Project llm4sd - Copyright 2026 The llm4sd Authors.
// SPDX-License-Identifier: Apache-2.0
//

// Atom-environment queries for the contribution tables. This is a larger
// SMARTS dialect than the public pattern language (it has logical operators
// and X/D counts) and is only used internally.

#ifndef LLM4SD_SRC_DESCRIPTORS_ENVIRONMENT_HPP_
#define LLM4SD_SRC_DESCRIPTORS_ENVIRONMENT_HPP_

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "llm4sd/molgraph/molecule.hpp"

namespace llm4sd::desc::detail {

// Molecule with implicit hydrogens materialized as atoms appended after the
// real ones.
struct ExpandedGraph {
  struct Node {
    int atomic_number;
    bool aromatic;
    int charge;
    int total_h;
    int parent;  // real atom for virtual hydrogens, else -1
  };
  struct Edge {
    int atom;
    mol::BondOrder order;
  };

  explicit ExpandedGraph(const mol::Molecule &m);

  std::vector<Node> nodes;
  std::vector<std::vector<Edge>> adj;
  int num_real = 0;
};

struct AtomExpr {
  enum class Op { kAnd, kOr, kNot, kTrue, kAtomicNumber, kAromatic, kAliphatic,
                  kTotalH, kConnections, kDegree, kCharge };
  Op op = Op::kTrue;
  int value = 0;
  std::vector<AtomExpr> args;

  bool eval(const ExpandedGraph &g, int atom) const;
};

enum class EnvBond { kDefault, kSingle, kDouble, kTriple, kAromatic, kAny };

struct Environment {
  std::vector<AtomExpr> atoms;
  struct Link {
    int a;
    int b;
    EnvBond bond;
  };
  std::vector<Link> links;
  std::string source;

  /// True when some embedding maps pattern atom 0 onto `atom`.
  bool matches_at(const ExpandedGraph &g, int atom) const;
};

Environment parse_environment(std::string_view smarts);

}  // namespace llm4sd::desc::detail

#endif  // LLM4SD_SRC_DESCRIPTORS_ENVIRONMENT_HPP_
