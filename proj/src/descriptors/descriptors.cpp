//
// Project llm4sd - Copyright 2026 The llm4sd Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "llm4sd/descriptors/descriptors.hpp"

#include <algorithm>
#include <bit>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <utility>

#include "environment.hpp"
#include "llm4sd/data_files.hpp"
#include "llm4sd/molgraph/element.hpp"

namespace llm4sd::desc {

using mol::BondOrder;
using mol::Molecule;

namespace {

bool is_halogen(int z) { return z == 9 || z == 17 || z == 35 || z == 53 || z == 85; }

// ---- TPSA ---------------------------------------------------------------

struct TpsaRow {
  int element;
  // nbrs, h, charge, single, double, triple, aromatic; nullopt = any
  std::array<std::optional<int>, 7> counts;
  std::optional<bool> in_ring3;
  double value;
};

struct TpsaFallback {
  double base, per_nbr, per_h;
};

struct TpsaTable {
  std::vector<TpsaRow> rows;
  std::map<int, TpsaFallback> fallback;
};

const TpsaTable &tpsa_table() {
  static const TpsaTable table = [] {
    TpsaTable t;
    const mol::ElementTable &elements = mol::ElementTable::instance();
    std::istringstream in{std::string(data_files::tpsa_contributions())};
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty() || line[0] == '#')
        continue;
      std::istringstream f(line);
      std::string head;
      f >> head;
      auto bad = [&] {
        return std::runtime_error("tpsa table: malformed line "
                                  + std::to_string(lineno));
      };
      if (head == "fallback") {
        std::string sym;
        TpsaFallback fb{};
        if (!(f >> sym >> fb.base >> fb.per_nbr >> fb.per_h))
          throw bad();
        t.fallback[elements.find(sym)->atomic_number] = fb;
        continue;
      }
      const mol::Element *e = elements.find(head);
      if (e == nullptr)
        throw bad();
      TpsaRow row{e->atomic_number, {}, std::nullopt, 0.0};
      for (auto &c: row.counts) {
        std::string tok;
        if (!(f >> tok))
          throw bad();
        if (tok != "*")
          c = std::stoi(tok);
      }
      std::string ring;
      if (!(f >> ring >> row.value))
        throw bad();
      if (ring != "*")
        row.in_ring3 = ring == "y";
      t.rows.push_back(row);
    }
    return t;
  }();
  return table;
}

double tpsa_atom(const Molecule &m, int i) {
  const mol::Atom &a = m.atom(i);
  const TpsaTable &t = tpsa_table();
  const auto fb = t.fallback.find(a.atomic_number);
  if (fb == t.fallback.end())
    return 0.0;
  std::array<int, 7> counts{};
  counts[0] = m.heavy_degree(i);
  counts[1] = m.total_h(i);
  counts[2] = a.formal_charge;
  for (const mol::Neighbor &nb: m.neighbors(i)) {
    if (m.atom(nb.atom).is_hydrogen())
      continue;
    switch (m.bond(nb.bond).order) {
    case BondOrder::kSingle:
      ++counts[3];
      break;
    case BondOrder::kDouble:
      ++counts[4];
      break;
    case BondOrder::kTriple:
      ++counts[5];
      break;
    case BondOrder::kAromatic:
      ++counts[6];
      break;
    }
  }
  const bool ring3 = m.atom_in_ring_of_size(i, 3);
  for (const TpsaRow &row: t.rows) {
    if (row.element != a.atomic_number)
      continue;
    bool ok = true;
    for (std::size_t k = 0; k < counts.size() && ok; ++k)
      ok = !row.counts[k] || *row.counts[k] == counts[k];
    if (ok && row.in_ring3)
      ok = *row.in_ring3 == ring3;
    if (ok)
      return row.value;
  }
  const double v = fb->second.base - fb->second.per_nbr * counts[0]
                   + fb->second.per_h * counts[1];
  return std::max(0.0, v);
}

// ---- Crippen ------------------------------------------------------------

struct CrippenType {
  std::string id;
  detail::Environment env;
  double logp;
  bool hydrogen;
};

const std::vector<CrippenType> &crippen_types() {
  static const std::vector<CrippenType> types = [] {
    std::vector<CrippenType> out;
    std::istringstream in{std::string(data_files::crippen_contributions())};
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty() || line[0] == '#')
        continue;
      std::istringstream f(line);
      std::string id, smarts;
      double logp = 0;
      if (!(f >> id >> smarts >> logp))
        throw std::runtime_error("crippen table: malformed line: " + line);
      const bool hydrogen = smarts.starts_with("[#1]");
      out.push_back({id, detail::parse_environment(smarts), logp, hydrogen});
    }
    return out;
  }();
  return types;
}

// ---- ECFP ---------------------------------------------------------------

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t combine(std::uint64_t h, std::uint64_t v) {
  return splitmix(h ^ (v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2)));
}

}  // namespace

// ---- simple counts ------------------------------------------------------

double molecular_weight(const Molecule &m) {
  const mol::ElementTable &t = mol::ElementTable::instance();
  const double h_mass = t.at(1).mass;
  double mw = 0.0;
  for (int i = 0; i < static_cast<int>(m.num_atoms()); ++i) {
    mw += t.at(m.atom(i).atomic_number).mass;
    mw += h_mass * (m.implicit_h(i) + m.atom(i).explicit_h.value_or(0));
  }
  return mw;
}

int heavy_atom_count(const Molecule &m) {
  return static_cast<int>(std::count_if(m.atoms().begin(), m.atoms().end(),
                                        [](const mol::Atom &a) { return !a.is_hydrogen(); }));
}

int hbond_donors(const Molecule &m) {
  int n = 0;
  for (int i = 0; i < static_cast<int>(m.num_atoms()); ++i) {
    const int z = m.atom(i).atomic_number;
    if ((z == 7 || z == 8) && m.total_h(i) > 0)
      ++n;
  }
  return n;
}

int hbond_acceptors(const Molecule &m) {
  return static_cast<int>(std::count_if(m.atoms().begin(), m.atoms().end(),
                                        [](const mol::Atom &a) {
                                          return a.atomic_number == 7
                                                 || a.atomic_number == 8;
                                        }));
}

int rotatable_bonds(const Molecule &m) {
  auto amide_carbon = [&](int c) {
    if (m.atom(c).atomic_number != 6 || m.atom(c).aromatic)
      return false;
    for (const mol::Neighbor &nb: m.neighbors(c))
      if (m.atom(nb.atom).atomic_number == 8
          && m.bond(nb.bond).order == BondOrder::kDouble)
        return true;
    return false;
  };
  int n = 0;
  for (int e = 0; e < static_cast<int>(m.num_bonds()); ++e) {
    const mol::Bond &b = m.bond(e);
    if (b.order != BondOrder::kSingle || m.bond_in_ring(e))
      continue;
    if (m.atom(b.begin).is_hydrogen() || m.atom(b.end).is_hydrogen())
      continue;
    if (m.heavy_degree(b.begin) < 2 || m.heavy_degree(b.end) < 2)
      continue;
    const int zb = m.atom(b.begin).atomic_number;
    const int ze = m.atom(b.end).atomic_number;
    if ((zb == 7 && amide_carbon(b.end)) || (ze == 7 && amide_carbon(b.begin)))
      continue;
    ++n;
  }
  return n;
}

int aromatic_ring_count(const Molecule &m) {
  int n = 0;
  for (const auto &ring: m.rings()) {
    bool all = true;
    for (std::size_t k = 0; k < ring.size() && all; ++k) {
      const auto b = m.bond_between(ring[k], ring[(k + 1) % ring.size()]);
      all = b && m.bond(*b).order == BondOrder::kAromatic;
    }
    if (all)
      ++n;
  }
  return n;
}

double tpsa(const Molecule &m) {
  double total = 0.0;
  for (int i = 0; i < static_cast<int>(m.num_atoms()); ++i)
    total += tpsa_atom(m, i);
  return total;
}

std::vector<double> clogp_contributions(const Molecule &m,
                                        std::vector<std::string> *types) {
  const detail::ExpandedGraph g(m);
  const auto &table = crippen_types();
  std::vector<double> out(m.num_atoms(), 0.0);
  if (types != nullptr)
    types->assign(m.num_atoms(), std::string());
  for (int i = 0; i < static_cast<int>(g.nodes.size()); ++i) {
    const bool h = g.nodes[i].atomic_number == 1;
    // A hydrogen's contribution is booked on the atom it is attached to.
    int owner = i;
    if (i >= g.num_real)
      owner = g.nodes[i].parent;
    else if (h && !g.adj[i].empty() && g.adj[i][0].atom < g.num_real)
      owner = g.adj[i][0].atom;
    for (const CrippenType &t: table) {
      if (t.hydrogen != h || !t.env.matches_at(g, i))
        continue;
      out[owner] += t.logp;
      if (types != nullptr && i < g.num_real)
        (*types)[i] = t.id;
      break;
    }
  }
  return out;
}

double clogp(const Molecule &m, CoveragePolicy policy,
             std::vector<std::string> *warnings) {
  std::vector<std::string> types;
  const std::vector<double> contrib = clogp_contributions(m, &types);
  double total = 0.0;
  for (int i = 0; i < static_cast<int>(m.num_atoms()); ++i) {
    if (types[i].empty()) {
      const std::string msg = "clogp: no atom type for atom "
                              + std::to_string(i) + " ("
                              + std::string(m.atom(i).symbol()) + ")";
      if (policy == CoveragePolicy::kError)
        throw DescriptorError(msg);
      if (warnings != nullptr)
        warnings->push_back(msg);
    }
    total += contrib[i];
  }
  return total;
}

// ---- registry -----------------------------------------------------------

namespace {

using Fn = double (*)(const Molecule &, CoveragePolicy, std::vector<std::string> *);

struct Entry {
  DescriptorInfo info;
  Fn fn;
};

int count_elements(const Molecule &m, bool (*pred)(int)) {
  return static_cast<int>(std::count_if(m.atoms().begin(), m.atoms().end(),
                                        [&](const mol::Atom &a) {
                                          return pred(a.atomic_number);
                                        }));
}

const std::vector<Entry> &registry() {
  using K = ValueKind;
  static const std::vector<Entry> entries = {
      {{"mw", "g/mol", K::kReal, "molecular weight including hydrogens"},
       [](const Molecule &m, CoveragePolicy, std::vector<std::string> *) {
         return molecular_weight(m);
       }},
      {{"heavy_atom_count", "atoms", K::kInteger, "non-hydrogen atoms"},
       [](const Molecule &m, CoveragePolicy, std::vector<std::string> *) {
         return static_cast<double>(heavy_atom_count(m));
       }},
      {{"hbd", "atoms", K::kInteger, "N and O atoms bearing at least one H"},
       [](const Molecule &m, CoveragePolicy, std::vector<std::string> *) {
         return static_cast<double>(hbond_donors(m));
       }},
      {{"hba", "atoms", K::kInteger, "N plus O atom count"},
       [](const Molecule &m, CoveragePolicy, std::vector<std::string> *) {
         return static_cast<double>(hbond_acceptors(m));
       }},
      {{"tpsa", "A^2", K::kReal, "topological polar surface area (N, O)"},
       [](const Molecule &m, CoveragePolicy, std::vector<std::string> *) {
         return tpsa(m);
       }},
      {{"clogp", "log units", K::kReal, "Wildman-Crippen octanol/water logP"},
       [](const Molecule &m, CoveragePolicy p, std::vector<std::string> *w) {
         return clogp(m, p, w);
       }},
      {{"rotatable_bonds", "bonds", K::kInteger,
        "acyclic single bonds between non-terminal heavy atoms, amide C-N excluded"},
       [](const Molecule &m, CoveragePolicy, std::vector<std::string> *) {
         return static_cast<double>(rotatable_bonds(m));
       }},
      {{"ring_count", "rings", K::kInteger, "smallest set of smallest rings"},
       [](const Molecule &m, CoveragePolicy, std::vector<std::string> *) {
         return static_cast<double>(m.rings().size());
       }},
      {{"aromatic_ring_count", "rings", K::kInteger, "rings whose bonds are all aromatic"},
       [](const Molecule &m, CoveragePolicy, std::vector<std::string> *) {
         return static_cast<double>(aromatic_ring_count(m));
       }},
      {{"halogen_count", "atoms", K::kInteger, "F, Cl, Br, I, At atoms"},
       [](const Molecule &m, CoveragePolicy, std::vector<std::string> *) {
         return static_cast<double>(count_elements(m, is_halogen));
       }},
      {{"formal_charge_total", "e", K::kInteger, "sum of formal charges"},
       [](const Molecule &m, CoveragePolicy, std::vector<std::string> *) {
         int q = 0;
         for (const mol::Atom &a: m.atoms())
           q += a.formal_charge;
         return static_cast<double>(q);
       }},
      {{"max_ring_size", "atoms", K::kInteger, "largest ring in the SSSR, 0 if acyclic"},
       [](const Molecule &m, CoveragePolicy, std::vector<std::string> *) {
         std::size_t s = 0;
         for (const auto &r: m.rings())
           s = std::max(s, r.size());
         return static_cast<double>(s);
       }},
      {{"nitrogen_count", "atoms", K::kInteger, "N atoms"},
       [](const Molecule &m, CoveragePolicy, std::vector<std::string> *) {
         return static_cast<double>(count_elements(m, [](int z) { return z == 7; }));
       }},
      {{"oxygen_count", "atoms", K::kInteger, "O atoms"},
       [](const Molecule &m, CoveragePolicy, std::vector<std::string> *) {
         return static_cast<double>(count_elements(m, [](int z) { return z == 8; }));
       }},
      {{"heteroatom_count", "atoms", K::kInteger, "atoms other than C and H"},
       [](const Molecule &m, CoveragePolicy, std::vector<std::string> *) {
         return static_cast<double>(
             count_elements(m, [](int z) { return z != 6 && z != 1; }));
       }},
  };
  return entries;
}

}  // namespace

const std::vector<DescriptorInfo> &list_descriptors() {
  static const std::vector<DescriptorInfo> infos = [] {
    std::vector<DescriptorInfo> out;
    for (const Entry &e: registry())
      out.push_back(e.info);
    return out;
  }();
  return infos;
}

const DescriptorInfo *find_descriptor(std::string_view name) {
  for (const DescriptorInfo &d: list_descriptors())
    if (d.name == name)
      return &d;
  return nullptr;
}

double compute(const Molecule &m, std::string_view name, CoveragePolicy policy,
               std::vector<std::string> *warnings) {
  for (const Entry &e: registry())
    if (e.info.name == name)
      return e.fn(m, policy, warnings);
  throw DescriptorError("unknown descriptor '" + std::string(name) + "'");
}

// ---- fingerprints -------------------------------------------------------

std::size_t BitVector::count() const {
  std::size_t c = 0;
  for (std::uint64_t w: bits_)
    c += static_cast<std::size_t>(std::popcount(w));
  return c;
}

BitVector ecfp4(const Molecule &m, std::size_t n_bits) {
  if (n_bits == 0 || (n_bits & (n_bits - 1)) != 0)
    throw std::invalid_argument("ecfp4: n_bits must be a power of two");
  const int n = static_cast<int>(m.num_atoms());
  std::vector<std::uint64_t> id(n);
  for (int i = 0; i < n; ++i) {
    const mol::Atom &a = m.atom(i);
    std::uint64_t h = 0x4543465034ULL;
    for (int v: {a.atomic_number, m.heavy_degree(i), m.total_h(i),
                 a.formal_charge, m.atom_in_ring(i) ? 1 : 0})
      h = combine(h, static_cast<std::uint64_t>(static_cast<std::int64_t>(v)));
    id[i] = h;
  }
  BitVector fp(n_bits);
  for (std::uint64_t v: id)
    fp.set(v % n_bits);
  for (int radius = 1; radius <= 2; ++radius) {
    std::vector<std::uint64_t> next(n);
    std::vector<std::pair<int, std::uint64_t>> env;
    for (int i = 0; i < n; ++i) {
      env.clear();
      for (const mol::Neighbor &nb: m.neighbors(i))
        env.emplace_back(static_cast<int>(m.bond(nb.bond).order), id[nb.atom]);
      std::sort(env.begin(), env.end());
      std::uint64_t h = combine(static_cast<std::uint64_t>(radius), id[i]);
      for (const auto &[order, nid]: env)
        h = combine(combine(h, static_cast<std::uint64_t>(order)), nid);
      next[i] = h;
    }
    id = std::move(next);
    for (std::uint64_t v: id)
      fp.set(v % n_bits);
  }
  return fp;
}

double tanimoto(const BitVector &a, const BitVector &b) {
  if (a.size() != b.size())
    throw std::invalid_argument("tanimoto: fingerprint sizes differ");
  std::size_t both = 0, either = 0;
  for (std::size_t w = 0; w < a.words().size(); ++w) {
    both += static_cast<std::size_t>(std::popcount(a.words()[w] & b.words()[w]));
    either += static_cast<std::size_t>(std::popcount(a.words()[w] | b.words()[w]));
  }
  return either == 0 ? 1.0 : static_cast<double>(both) / static_cast<double>(either);
}

}  // namespace llm4sd::desc
