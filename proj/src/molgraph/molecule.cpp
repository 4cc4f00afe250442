//
// Project llm4sd - Copyright 2026 The llm4sd Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "llm4sd/molgraph/molecule.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <deque>
#include <map>
#include <numeric>
#include <set>
#include <utility>

#include "llm4sd/molgraph/element.hpp"

namespace llm4sd::mol {

std::string_view bond_symbol(BondOrder order) {
  switch (order) {
  case BondOrder::kSingle:
    return "-";
  case BondOrder::kDouble:
    return "=";
  case BondOrder::kTriple:
    return "#";
  case BondOrder::kAromatic:
    return ":";
  }
  return "?";
}

std::string_view error_kind_name(ErrorKind kind) {
  switch (kind) {
  case ErrorKind::kSyntax:
    return "syntax error";
  case ErrorKind::kUnclosedRing:
    return "unclosed ring closure";
  case ErrorKind::kUnknownElement:
    return "unknown element";
  case ErrorKind::kValence:
    return "valence violation";
  case ErrorKind::kAromaticity:
    return "aromaticity error";
  case ErrorKind::kUnsupported:
    return "unsupported construct";
  case ErrorKind::kBudget:
    return "budget exceeded";
  }
  return "error";
}

namespace {

std::string format_error(ErrorKind kind, const std::string &message,
                         std::optional<std::size_t> position) {
  std::string out(error_kind_name(kind));
  if (position)
    out += " at position " + std::to_string(*position);
  out += ": ";
  out += message;
  return out;
}

// GF(2) row reduction over edge-incidence bitsets.
class CycleSpace {
public:
  explicit CycleSpace(std::size_t num_edges)
      : words_((num_edges + 63) / 64) { }

  bool add_if_independent(std::vector<std::uint64_t> v) {
    for (const auto &[pivot, row]: rows_) {
      if ((v[pivot / 64] >> (pivot % 64)) & 1U) {
        for (std::size_t w = 0; w < words_; ++w)
          v[w] ^= row[w];
      }
    }
    for (std::size_t w = 0; w < words_; ++w) {
      if (v[w] != 0) {
        const int bit = std::countr_zero(v[w]);
        rows_.emplace_back(w * 64 + bit, std::move(v));
        return true;
      }
    }
    return false;
  }

  std::size_t rank() const { return rows_.size(); }
  std::size_t words() const { return words_; }

private:
  std::size_t words_;
  std::vector<std::pair<std::size_t, std::vector<std::uint64_t>>> rows_;
};

std::vector<int> order_cycle(const std::vector<int> &edges,
                             std::span<const Bond> bonds) {
  std::map<int, std::vector<int>> adj;
  for (int e: edges) {
    adj[bonds[e].begin].push_back(bonds[e].end);
    adj[bonds[e].end].push_back(bonds[e].begin);
  }
  for (auto &[atom, nbrs]: adj)
    std::sort(nbrs.begin(), nbrs.end());

  const int start = adj.begin()->first;
  std::vector<int> cycle{start};
  int prev = -1;
  int cur = start;
  while (cycle.size() < edges.size()) {
    const auto &nbrs = adj[cur];
    const int next = nbrs[0] != prev ? nbrs[0] : nbrs[1];
    cycle.push_back(next);
    prev = cur;
    cur = next;
  }
  return cycle;
}

}  // namespace

ParseError::ParseError(ErrorKind kind, std::string message,
                       std::optional<std::size_t> position)
    : std::runtime_error(format_error(kind, message, position)), kind_(kind),
      position_(position), detail_(std::move(message)) { }

std::string_view Atom::symbol() const {
  return ElementTable::instance().at(atomic_number).symbol;
}

std::vector<std::vector<int>>
smallest_rings(int num_atoms, std::span<const Bond> bonds) {
  const int m = static_cast<int>(bonds.size());
  std::vector<std::vector<std::pair<int, int>>> adj(num_atoms);
  for (int e = 0; e < m; ++e) {
    adj[bonds[e].begin].emplace_back(bonds[e].end, e);
    adj[bonds[e].end].emplace_back(bonds[e].begin, e);
  }

  // Cyclomatic number fixes how many independent rings exist.
  std::vector<int> comp(num_atoms, -1);
  int ncomp = 0;
  for (int s = 0; s < num_atoms; ++s) {
    if (comp[s] >= 0)
      continue;
    std::deque<int> queue{s};
    comp[s] = ncomp;
    while (!queue.empty()) {
      const int u = queue.front();
      queue.pop_front();
      for (auto [v, e]: adj[u]) {
        if (comp[v] < 0) {
          comp[v] = ncomp;
          queue.push_back(v);
        }
      }
    }
    ++ncomp;
  }
  const int target = m - num_atoms + ncomp;
  if (target <= 0)
    return {};

  CycleSpace space(m);
  const std::size_t words = space.words();
  std::set<std::vector<std::uint64_t>> seen;
  std::vector<std::vector<int>> candidates;

  // Horton candidates: shortest path r->x, edge (x,y), shortest path y->r.
  std::vector<int> parent_edge(num_atoms), dist(num_atoms);
  for (int root = 0; root < num_atoms; ++root) {
    std::fill(parent_edge.begin(), parent_edge.end(), -1);
    std::fill(dist.begin(), dist.end(), -1);
    std::deque<int> queue{root};
    dist[root] = 0;
    while (!queue.empty()) {
      const int u = queue.front();
      queue.pop_front();
      for (auto [v, e]: adj[u]) {
        if (dist[v] < 0) {
          dist[v] = dist[u] + 1;
          parent_edge[v] = e;
          queue.push_back(v);
        }
      }
    }
    auto path_to_root = [&](int v, std::vector<int> &atoms,
                            std::vector<int> &edges) {
      while (v != root) {
        atoms.push_back(v);
        const int e = parent_edge[v];
        edges.push_back(e);
        v = bonds[e].other(v);
      }
    };
    for (int e = 0; e < m; ++e) {
      const int x = bonds[e].begin;
      const int y = bonds[e].end;
      if (dist[x] < 0 || parent_edge[x] == e || parent_edge[y] == e)
        continue;
      std::vector<int> ax, ex, ay, ey;
      path_to_root(x, ax, ex);
      path_to_root(y, ay, ey);
      std::sort(ax.begin(), ax.end());
      std::sort(ay.begin(), ay.end());
      std::vector<int> common;
      std::set_intersection(ax.begin(), ax.end(), ay.begin(), ay.end(),
                            std::back_inserter(common));
      if (!common.empty())
        continue;
      std::vector<int> edges = ex;
      edges.insert(edges.end(), ey.begin(), ey.end());
      edges.push_back(e);
      std::sort(edges.begin(), edges.end());
      std::vector<std::uint64_t> bits(words, 0);
      for (int f: edges)
        bits[f / 64] |= std::uint64_t{1} << (f % 64);
      if (seen.insert(bits).second)
        candidates.push_back(std::move(edges));
    }
  }

  std::sort(candidates.begin(), candidates.end(),
            [](const auto &a, const auto &b) {
              if (a.size() != b.size())
                return a.size() < b.size();
              return a < b;
            });

  std::vector<std::vector<int>> rings;
  for (auto &edges: candidates) {
    std::vector<std::uint64_t> bits(words, 0);
    for (int f: edges)
      bits[f / 64] |= std::uint64_t{1} << (f % 64);
    if (space.add_if_independent(std::move(bits))) {
      rings.push_back(std::move(edges));
      if (static_cast<int>(rings.size()) == target)
        break;
    }
  }
  return rings;
}

Molecule Molecule::from_graph(std::vector<Atom> atoms, std::vector<Bond> bonds,
                              std::string source,
                              std::vector<std::size_t> atom_positions,
                              std::vector<std::string> warnings) {
  const ElementTable &table = ElementTable::instance();
  const int n = static_cast<int>(atoms.size());
  auto where = [&](int atom) -> std::optional<std::size_t> {
    if (atom >= 0 && atom < static_cast<int>(atom_positions.size()))
      return atom_positions[atom];
    return std::nullopt;
  };

  Molecule m;
  for (int i = 0; i < n; ++i) {
    atoms[i].index = i;
    if (table.find(atoms[i].atomic_number) == nullptr)
      throw ParseError(ErrorKind::kUnknownElement,
                       "atomic number " + std::to_string(atoms[i].atomic_number),
                       where(i));
  }

  std::set<std::pair<int, int>> pairs;
  for (const Bond &b: bonds) {
    if (b.begin < 0 || b.end < 0 || b.begin >= n || b.end >= n)
      throw ParseError(ErrorKind::kSyntax, "bond endpoint out of range");
    if (b.begin == b.end)
      throw ParseError(ErrorKind::kSyntax, "bond from an atom to itself",
                       where(b.begin));
    if (!pairs.insert(std::minmax(b.begin, b.end)).second)
      throw ParseError(ErrorKind::kSyntax, "duplicate bond between atoms "
                                               + std::to_string(b.begin) + " and "
                                               + std::to_string(b.end),
                       where(b.end));
  }

  m.atoms_ = std::move(atoms);
  m.bonds_ = std::move(bonds);
  m.source_ = std::move(source);
  m.warnings_ = std::move(warnings);

  // CSR adjacency, neighbors in bond order.
  std::vector<int> degree(n, 0);
  for (const Bond &b: m.bonds_) {
    ++degree[b.begin];
    ++degree[b.end];
  }
  m.adj_offset_.assign(n + 1, 0);
  for (int i = 0; i < n; ++i)
    m.adj_offset_[i + 1] = m.adj_offset_[i] + degree[i];
  m.adj_.resize(m.adj_offset_[n]);
  std::vector<std::size_t> fill(m.adj_offset_.begin(), m.adj_offset_.end() - 1);
  for (int e = 0; e < static_cast<int>(m.bonds_.size()); ++e) {
    const Bond &b = m.bonds_[e];
    m.adj_[fill[b.begin]++] = {b.end, e};
    m.adj_[fill[b.end]++] = {b.begin, e};
  }

  // Components in order of first appearance.
  m.component_.assign(n, -1);
  for (int s = 0; s < n; ++s) {
    if (m.component_[s] >= 0)
      continue;
    std::deque<int> queue{s};
    m.component_[s] = m.num_components_;
    while (!queue.empty()) {
      const int u = queue.front();
      queue.pop_front();
      for (const Neighbor &nb: m.neighbors(u)) {
        if (m.component_[nb.atom] < 0) {
          m.component_[nb.atom] = m.num_components_;
          queue.push_back(nb.atom);
        }
      }
    }
    ++m.num_components_;
  }

  // Rings.
  const auto ring_edges = smallest_rings(n, m.bonds_);
  m.bond_in_ring_.assign(m.bonds_.size(), false);
  m.ring_size_of_atom_.assign(n, 0);
  for (const auto &edges: ring_edges) {
    std::vector<int> cycle = order_cycle(edges, m.bonds_);
    const int size = static_cast<int>(cycle.size());
    for (int e: edges)
      m.bond_in_ring_[e] = true;
    for (int a: cycle) {
      if (m.ring_size_of_atom_[a] == 0 || size < m.ring_size_of_atom_[a])
        m.ring_size_of_atom_[a] = size;
    }
    m.rings_.push_back(std::move(cycle));
    m.ring_bonds_.push_back(edges);
  }
  // Every cyclic edge lies on at least one basis ring.

  for (int e = 0; e < static_cast<int>(m.bonds_.size()); ++e) {
    if (m.bonds_[e].order == BondOrder::kAromatic && !m.bond_in_ring_[e])
      throw ParseError(ErrorKind::kAromaticity,
                       "aromatic bond outside of any ring",
                       where(m.bonds_[e].end));
  }

  // Hydrogens and valence.
  m.implicit_h_.assign(n, 0);
  for (int i = 0; i < n; ++i) {
    const Atom &a = m.atoms_[i];
    if (a.aromatic && !m.atom_in_ring(i))
      throw ParseError(ErrorKind::kAromaticity,
                       std::string("aromatic atom '") + std::string(a.symbol())
                           + "' is not in a ring",
                       where(i));
    if (a.is_bracket())
      continue;
    int sum = 0;
    for (const Neighbor &nb: m.neighbors(i))
      sum += valence_contribution(m.bonds_[nb.bond].order);
    const auto &valences = table.at(a.atomic_number).default_valences;
    if (valences.empty())
      continue;
    const auto it = std::find_if(valences.begin(), valences.end(),
                                 [sum](int v) { return v >= sum; });
    if (it == valences.end())
      throw ParseError(ErrorKind::kValence,
                       std::string("atom '") + std::string(a.symbol()) + "' has "
                           + std::to_string(sum)
                           + " bonds, more than any allowed valence",
                       where(i));
    // Aromatic atoms give one electron to the pi system when they can.
    m.implicit_h_[i] = a.aromatic ? std::max(0, *it - sum - 1) : *it - sum;
  }
  return m;
}

std::span<const Neighbor> Molecule::neighbors(int atom) const {
  return {adj_.data() + adj_offset_[atom],
          adj_offset_[atom + 1] - adj_offset_[atom]};
}

std::optional<int> Molecule::bond_between(int a, int b) const {
  for (const Neighbor &nb: neighbors(a))
    if (nb.atom == b)
      return nb.bond;
  return std::nullopt;
}

int Molecule::total_h(int atom) const {
  int h = implicit_h_[atom] + atoms_[atom].explicit_h.value_or(0);
  for (const Neighbor &nb: neighbors(atom))
    if (atoms_[nb.atom].is_hydrogen())
      ++h;
  return h;
}

int Molecule::heavy_degree(int atom) const {
  int d = 0;
  for (const Neighbor &nb: neighbors(atom))
    if (!atoms_[nb.atom].is_hydrogen())
      ++d;
  return d;
}

bool Molecule::atom_in_ring_of_size(int atom, int size) const {
  for (const auto &ring: rings_)
    if (static_cast<int>(ring.size()) == size
        && std::find(ring.begin(), ring.end(), atom) != ring.end())
      return true;
  return false;
}

std::vector<int> Molecule::rings_with_bond(int bond) const {
  std::vector<int> out;
  for (int r = 0; r < static_cast<int>(ring_bonds_.size()); ++r)
    if (std::binary_search(ring_bonds_[r].begin(), ring_bonds_[r].end(), bond))
      out.push_back(r);
  return out;
}

}  // namespace llm4sd::mol
