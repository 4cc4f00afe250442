//
// Project llm4sd - Copyright 2026 The llm4sd Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "environment.hpp"

#include <cctype>
#include <functional>

#include "llm4sd/molgraph/element.hpp"

namespace llm4sd::desc::detail {

using mol::BondOrder;
using mol::ErrorKind;
using mol::ParseError;

ExpandedGraph::ExpandedGraph(const mol::Molecule &m) {
  num_real = static_cast<int>(m.num_atoms());
  nodes.reserve(num_real);
  adj.resize(num_real);
  for (int i = 0; i < num_real; ++i) {
    const mol::Atom &a = m.atom(i);
    nodes.push_back({a.atomic_number, a.aromatic, a.formal_charge, m.total_h(i), -1});
    for (const mol::Neighbor &nb: m.neighbors(i))
      adj[i].push_back({nb.atom, m.bond(nb.bond).order});
  }
  for (int i = 0; i < num_real; ++i) {
    const int virtual_h = m.implicit_h(i) + m.atom(i).explicit_h.value_or(0);
    for (int k = 0; k < virtual_h; ++k) {
      const int h = static_cast<int>(nodes.size());
      nodes.push_back({1, false, 0, 0, i});
      adj.push_back({{i, BondOrder::kSingle}});
      adj[i].push_back({h, BondOrder::kSingle});
    }
  }
}

bool AtomExpr::eval(const ExpandedGraph &g, int atom) const {
  const ExpandedGraph::Node &n = g.nodes[atom];
  switch (op) {
  case Op::kAnd:
    for (const AtomExpr &e: args)
      if (!e.eval(g, atom))
        return false;
    return true;
  case Op::kOr:
    for (const AtomExpr &e: args)
      if (e.eval(g, atom))
        return true;
    return false;
  case Op::kNot:
    return !args[0].eval(g, atom);
  case Op::kTrue:
    return true;
  case Op::kAtomicNumber:
    return n.atomic_number == value;
  case Op::kAromatic:
    return n.aromatic;
  case Op::kAliphatic:
    return !n.aromatic;
  case Op::kTotalH:
    return n.total_h == value;
  case Op::kConnections:
  case Op::kDegree:
    return static_cast<int>(g.adj[atom].size()) == value;
  case Op::kCharge:
    return n.charge == value;
  }
  return false;
}

namespace {

bool bond_ok(EnvBond q, BondOrder order) {
  switch (q) {
  case EnvBond::kDefault:
    return order == BondOrder::kSingle || order == BondOrder::kAromatic;
  case EnvBond::kSingle:
    return order == BondOrder::kSingle;
  case EnvBond::kDouble:
    return order == BondOrder::kDouble;
  case EnvBond::kTriple:
    return order == BondOrder::kTriple;
  case EnvBond::kAromatic:
    return order == BondOrder::kAromatic;
  case EnvBond::kAny:
    return true;
  }
  return false;
}

AtomExpr prim(AtomExpr::Op op, int value = 0) {
  AtomExpr e;
  e.op = op;
  e.value = value;
  return e;
}

AtomExpr all_of(std::vector<AtomExpr> args) {
  if (args.size() == 1)
    return std::move(args[0]);
  AtomExpr e;
  e.op = AtomExpr::Op::kAnd;
  e.args = std::move(args);
  return e;
}

AtomExpr element(int z, bool aromatic) {
  return all_of({prim(AtomExpr::Op::kAtomicNumber, z),
                 prim(aromatic ? AtomExpr::Op::kAromatic : AtomExpr::Op::kAliphatic)});
}

class EnvParser {
public:
  explicit EnvParser(std::string_view s): s_(s) { }

  Environment parse() {
    Environment env;
    env.source = std::string(s_);
    std::vector<int> stack;
    int prev = -1;
    EnvBond pending = EnvBond::kDefault;
    while (pos_ < s_.size()) {
      const char c = s_[pos_];
      if (c == '(') {
        stack.push_back(prev);
        ++pos_;
      } else if (c == ')') {
        if (stack.empty())
          fail("unmatched ')'");
        prev = stack.back();
        stack.pop_back();
        ++pos_;
      } else if (c == '-' || c == '=' || c == '#' || c == ':' || c == '~') {
        pending = c == '-'   ? EnvBond::kSingle
                  : c == '=' ? EnvBond::kDouble
                  : c == '#' ? EnvBond::kTriple
                  : c == ':' ? EnvBond::kAromatic
                             : EnvBond::kAny;
        ++pos_;
      } else {
        AtomExpr atom = c == '[' ? bracket() : bare();
        const int idx = static_cast<int>(env.atoms.size());
        env.atoms.push_back(std::move(atom));
        if (prev >= 0)
          env.links.push_back({prev, idx, pending});
        pending = EnvBond::kDefault;
        prev = idx;
      }
    }
    if (!stack.empty())
      fail("unclosed branch");
    if (env.atoms.empty())
      fail("empty environment");
    return env;
  }

private:
  [[noreturn]] void fail(const std::string &msg) const {
    throw ParseError(ErrorKind::kSyntax,
                     "environment '" + std::string(s_) + "': " + msg, pos_);
  }

  char peek(std::size_t off = 0) const {
    return pos_ + off < s_.size() ? s_[pos_ + off] : '\0';
  }

  int number(int fallback) {
    if (!std::isdigit(static_cast<unsigned char>(peek())))
      return fallback;
    int v = 0;
    while (std::isdigit(static_cast<unsigned char>(peek())))
      v = v * 10 + (s_[pos_++] - '0');
    return v;
  }

  AtomExpr bare() {
    const mol::ElementTable &table = mol::ElementTable::instance();
    const char c = peek();
    if (c == '*') {
      ++pos_;
      return prim(AtomExpr::Op::kTrue);
    }
    if (c == 'A' || c == 'a') {
      ++pos_;
      return prim(c == 'a' ? AtomExpr::Op::kAromatic : AtomExpr::Op::kAliphatic);
    }
    if (std::isupper(static_cast<unsigned char>(c))) {
      std::string sym(1, c);
      if ((c == 'C' && peek(1) == 'l') || (c == 'B' && peek(1) == 'r'))
        sym += peek(1);
      const mol::Element *e = table.find(sym);
      if (e == nullptr)
        fail("unknown atom " + sym);
      pos_ += sym.size();
      return element(e->atomic_number, false);
    }
    if (std::islower(static_cast<unsigned char>(c))) {
      const mol::Element *e = table.find(std::string(1, static_cast<char>(std::toupper(c))));
      if (e == nullptr)
        fail("unknown atom");
      ++pos_;
      return element(e->atomic_number, true);
    }
    fail(std::string("unexpected '") + c + "'");
  }

  AtomExpr bracket() {
    ++pos_;
    AtomExpr e = low_and();
    if (peek() != ']')
      fail("expected ']'");
    ++pos_;
    return e;
  }

  AtomExpr low_and() {
    std::vector<AtomExpr> parts{or_expr()};
    while (peek() == ';') {
      ++pos_;
      parts.push_back(or_expr());
    }
    return all_of(std::move(parts));
  }

  AtomExpr or_expr() {
    std::vector<AtomExpr> parts{high_and()};
    while (peek() == ',') {
      ++pos_;
      parts.push_back(high_and());
    }
    if (parts.size() == 1)
      return std::move(parts[0]);
    AtomExpr e;
    e.op = AtomExpr::Op::kOr;
    e.args = std::move(parts);
    return e;
  }

  AtomExpr high_and() {
    std::vector<AtomExpr> parts{unary()};
    while (true) {
      const char c = peek();
      if (c == '&') {
        ++pos_;
      } else if (c == ']' || c == ';' || c == ',' || c == '\0') {
        break;
      }
      parts.push_back(unary());
    }
    return all_of(std::move(parts));
  }

  AtomExpr unary() {
    if (peek() == '!') {
      ++pos_;
      AtomExpr e;
      e.op = AtomExpr::Op::kNot;
      e.args.push_back(unary());
      return e;
    }
    return primitive();
  }

  AtomExpr primitive() {
    const mol::ElementTable &table = mol::ElementTable::instance();
    const char c = peek();
    switch (c) {
    case '#':
      ++pos_;
      return prim(AtomExpr::Op::kAtomicNumber, number(-1));
    case '*':
      ++pos_;
      return prim(AtomExpr::Op::kTrue);
    case 'H':
      ++pos_;
      return prim(AtomExpr::Op::kTotalH, number(1));
    case 'X':
      ++pos_;
      return prim(AtomExpr::Op::kConnections, number(1));
    case 'D':
      ++pos_;
      return prim(AtomExpr::Op::kDegree, number(1));
    case '+':
    case '-': {
      const int sign = c == '+' ? 1 : -1;
      ++pos_;
      if (std::isdigit(static_cast<unsigned char>(peek())))
        return prim(AtomExpr::Op::kCharge, sign * number(0));
      int mag = 1;
      while (peek() == c) {
        ++mag;
        ++pos_;
      }
      return prim(AtomExpr::Op::kCharge, sign * mag);
    }
    default:
      break;
    }
    if (c == 'A' && !std::islower(static_cast<unsigned char>(peek(1)))) {
      ++pos_;
      return prim(AtomExpr::Op::kAliphatic);
    }
    if (c == 'a' && peek(1) != 's') {
      ++pos_;
      return prim(AtomExpr::Op::kAromatic);
    }
    if (std::isupper(static_cast<unsigned char>(c))) {
      const mol::Element *e = nullptr;
      if (std::islower(static_cast<unsigned char>(peek(1))))
        e = table.find(s_.substr(pos_, 2));
      if (e != nullptr) {
        pos_ += 2;
      } else {
        e = table.find(s_.substr(pos_, 1));
        if (e == nullptr)
          fail(std::string("unknown primitive '") + c + "'");
        ++pos_;
      }
      return element(e->atomic_number, false);
    }
    if (std::islower(static_cast<unsigned char>(c))) {
      std::string sym = (c == 's' && peek(1) == 'e') || (c == 'a' && peek(1) == 's')
                            ? std::string(s_.substr(pos_, 2))
                            : std::string(1, c);
      pos_ += sym.size();
      sym[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(sym[0])));
      const mol::Element *e = table.find(sym);
      if (e == nullptr)
        fail("unknown aromatic primitive");
      return element(e->atomic_number, true);
    }
    fail(std::string("unexpected '") + c + "'");
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

}  // namespace

bool Environment::matches_at(const ExpandedGraph &g, int atom) const {
  if (!atoms[0].eval(g, atom))
    return false;
  const int n = static_cast<int>(atoms.size());
  // Atoms are in parse order, so every atom after the first has exactly one
  // link to an earlier atom.
  std::vector<const Link *> parent(n, nullptr);
  for (const Link &l: links)
    parent[l.b] = &l;
  std::vector<int> image(n, -1);
  std::vector<char> used(g.nodes.size(), 0);
  image[0] = atom;
  used[atom] = 1;
  std::function<bool(int)> place = [&](int k) -> bool {
    if (k == n)
      return true;
    const Link &l = *parent[k];
    for (const ExpandedGraph::Edge &e: g.adj[image[l.a]]) {
      if (used[e.atom] || !bond_ok(l.bond, e.order) || !atoms[k].eval(g, e.atom))
        continue;
      image[k] = e.atom;
      used[e.atom] = 1;
      if (place(k + 1))
        return true;
      used[e.atom] = 0;
    }
    return false;
  };
  return place(1);
}

Environment parse_environment(std::string_view smarts) {
  return EnvParser(smarts).parse();
}

}  // namespace llm4sd::desc::detail
