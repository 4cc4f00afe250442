//
// Project llm4sd - Copyright 2026 The llm4sd Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "llm4sd/molgraph/scaffold.hpp"

#include <vector>

namespace llm4sd::mol {

Molecule murcko_scaffold(const Molecule &mol) {
  const int n = static_cast<int>(mol.num_atoms());
  if (mol.rings().empty())
    return {};

  std::vector<bool> keep(n, true);
  std::vector<int> degree(n, 0);
  for (int i = 0; i < n; ++i)
    degree[i] = static_cast<int>(mol.neighbors(i).size());

  // Peel acyclic leaves until only rings and ring-to-ring paths remain.
  std::vector<int> stack;
  for (int i = 0; i < n; ++i)
    if (!mol.atom_in_ring(i) && degree[i] <= 1)
      stack.push_back(i);
  while (!stack.empty()) {
    const int a = stack.back();
    stack.pop_back();
    if (!keep[a])
      continue;
    keep[a] = false;
    for (const Neighbor &nb: mol.neighbors(a)) {
      if (!keep[nb.atom])
        continue;
      if (--degree[nb.atom] <= 1 && !mol.atom_in_ring(nb.atom))
        stack.push_back(nb.atom);
    }
  }

  std::vector<int> remap(n, -1);
  std::vector<Atom> atoms;
  for (int i = 0; i < n; ++i) {
    if (!keep[i])
      continue;
    remap[i] = static_cast<int>(atoms.size());
    atoms.push_back(mol.atom(i));
  }
  std::vector<Bond> bonds;
  for (const Bond &b: mol.bonds())
    if (keep[b.begin] && keep[b.end])
      bonds.push_back({remap[b.begin], remap[b.end], b.order});
  return Molecule::from_graph(std::move(atoms), std::move(bonds));
}

}  // namespace llm4sd::mol
