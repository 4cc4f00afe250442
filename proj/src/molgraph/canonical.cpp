//
// Project llm4sd - Copyright 2026 The llm4sd Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "llm4sd/molgraph/canonical.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdint>
#include <numeric>
#include <string>
#include <tuple>

namespace llm4sd::mol {
namespace {

// Leaves explored before the search settles on the best one found so far.
constexpr int kLeafBudget = 5000;

using Invariant = std::array<int, 6>;

Invariant atom_invariant(const Molecule &mol, int i) {
  const Atom &a = mol.atom(i);
  return {a.atomic_number, a.aromatic ? 1 : 0, a.formal_charge,
          a.isotope.value_or(0), mol.total_h(i), mol.heavy_degree(i)};
}

class Canonicalizer {
public:
  explicit Canonicalizer(const Molecule &mol)
      : mol_(mol), n_(static_cast<int>(mol.num_atoms())) {
    invariants_.reserve(n_);
    for (int i = 0; i < n_; ++i)
      invariants_.push_back(atom_invariant(mol, i));
  }

  std::vector<int> run() {
    std::vector<int> order(n_);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      return invariants_[a] < invariants_[b];
    });
    std::vector<int> rank(n_);
    for (int k = 0; k < n_; ++k)
      rank[order[k]] = k > 0 && invariants_[order[k]] == invariants_[order[k - 1]]
                           ? rank[order[k - 1]]
                           : k;
    refine(rank);
    search(rank);
    return best_rank_;
  }

private:
  // Splits cells by the multiset of (bond order, neighbor cell) until stable.
  // Cell ids are the count of atoms in strictly smaller cells.
  void refine(std::vector<int> &rank) const {
    using Sig = std::pair<int, std::vector<std::pair<int, int>>>;
    std::vector<Sig> sig(n_);
    std::vector<int> order(n_);
    int cells = count_cells(rank);
    while (true) {
      for (int i = 0; i < n_; ++i) {
        sig[i].first = rank[i];
        sig[i].second.clear();
        for (const Neighbor &nb: mol_.neighbors(i))
          sig[i].second.emplace_back(rank[nb.atom],
                                     static_cast<int>(mol_.bond(nb.bond).order));
        std::sort(sig[i].second.begin(), sig[i].second.end());
      }
      std::iota(order.begin(), order.end(), 0);
      std::sort(order.begin(), order.end(),
                [&](int a, int b) { return sig[a] < sig[b]; });
      for (int k = 0; k < n_; ++k)
        rank[order[k]] = k > 0 && sig[order[k]] == sig[order[k - 1]]
                             ? rank[order[k - 1]]
                             : k;
      const int now = count_cells(rank);
      if (now == cells)
        return;
      cells = now;
    }
  }

  int count_cells(const std::vector<int> &rank) const {
    std::vector<bool> seen(n_, false);
    int c = 0;
    for (int r: rank)
      if (!seen[r]) {
        seen[r] = true;
        ++c;
      }
    return c;
  }

  std::vector<int> encode(const std::vector<int> &rank) const {
    std::vector<int> at(n_);
    for (int i = 0; i < n_; ++i)
      at[rank[i]] = i;
    std::vector<int> code;
    code.reserve(n_ * 6 + mol_.num_bonds() * 3);
    for (int p = 0; p < n_; ++p)
      code.insert(code.end(), invariants_[at[p]].begin(), invariants_[at[p]].end());
    std::vector<std::array<int, 3>> edges;
    edges.reserve(mol_.num_bonds());
    for (const Bond &b: mol_.bonds()) {
      const auto [lo, hi] = std::minmax(rank[b.begin], rank[b.end]);
      edges.push_back({lo, hi, static_cast<int>(b.order)});
    }
    std::sort(edges.begin(), edges.end());
    for (const auto &e: edges)
      code.insert(code.end(), e.begin(), e.end());
    return code;
  }

  // True when swapping a and b is an automorphism that fixes everything else:
  // two equal leaves on the same neighbor via the same bond order.
  bool twin_leaves(int a, int b) const {
    const auto na = mol_.neighbors(a);
    const auto nb = mol_.neighbors(b);
    if (na.size() != 1 || nb.size() != 1 || na[0].atom != nb[0].atom)
      return false;
    return invariants_[a] == invariants_[b]
           && mol_.bond(na[0].bond).order == mol_.bond(nb[0].bond).order;
  }

  void search(const std::vector<int> &rank) {
    if (leaves_ >= kLeafBudget)
      return;
    // First non-singleton cell by cell id.
    std::vector<int> size(n_, 0);
    for (int r: rank)
      ++size[r];
    int target = -1;
    for (int r = 0; r < n_; ++r)
      if (size[r] > 1) {
        target = r;
        break;
      }
    if (target < 0) {
      ++leaves_;
      std::vector<int> code = encode(rank);
      if (best_rank_.empty() || code < best_code_) {
        best_code_ = std::move(code);
        best_rank_ = rank;
      }
      return;
    }
    std::vector<int> members;
    for (int i = 0; i < n_; ++i)
      if (rank[i] == target)
        members.push_back(i);
    std::vector<int> tried;
    for (int a: members) {
      bool redundant = false;
      for (int t: tried)
        if (twin_leaves(a, t)) {
          redundant = true;
          break;
        }
      if (redundant)
        continue;
      tried.push_back(a);
      std::vector<int> next = rank;
      for (int i: members)
        if (i != a)
          next[i] = target + 1;
      refine(next);
      search(next);
    }
  }

  const Molecule &mol_;
  int n_;
  std::vector<Invariant> invariants_;
  int leaves_ = 0;
  std::vector<int> best_code_;
  std::vector<int> best_rank_;
};

std::string atom_token(const Molecule &mol, int i) {
  const Atom &a = mol.atom(i);
  std::string s;
  if (a.isotope)
    s += std::to_string(*a.isotope);
  std::string sym(a.symbol());
  if (a.aromatic)
    for (char &c: sym)
      c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  s += sym;
  const int h = mol.total_h(i);
  if (h > 0)
    s += "H" + std::to_string(h);
  if (a.formal_charge > 0)
    s += "+" + std::to_string(a.formal_charge);
  else if (a.formal_charge < 0)
    s += std::to_string(a.formal_charge);
  return s;
}

}  // namespace

std::vector<int> canonical_ranks(const Molecule &mol) {
  if (mol.empty())
    return {};
  return Canonicalizer(mol).run();
}

std::string canonical_key(const Molecule &mol) {
  if (mol.empty())
    return {};
  const std::vector<int> rank = canonical_ranks(mol);
  const int n = static_cast<int>(mol.num_atoms());
  std::vector<int> at(n);
  for (int i = 0; i < n; ++i)
    at[rank[i]] = i;
  std::string key;
  for (int p = 0; p < n; ++p) {
    if (p > 0)
      key += ' ';
    key += atom_token(mol, at[p]);
  }
  std::vector<std::tuple<int, int, BondOrder>> edges;
  for (const Bond &b: mol.bonds()) {
    const auto [lo, hi] = std::minmax(rank[b.begin], rank[b.end]);
    edges.emplace_back(lo, hi, b.order);
  }
  std::sort(edges.begin(), edges.end());
  key += " |";
  for (const auto &[lo, hi, order]: edges) {
    key += ' ';
    key += std::to_string(lo);
    key += bond_symbol(order);
    key += std::to_string(hi);
  }
  return key;
}

}  // namespace llm4sd::mol
