//
// Project llm4sd - Copyright 2026 The llm4sd Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "llm4sd/molgraph/pattern.hpp"

#include <algorithm>
#include <cctype>
#include <deque>
#include <functional>
#include <map>
#include <set>

#include "llm4sd/molgraph/element.hpp"

namespace llm4sd::mol {

bool PatternAtom::matches(const Molecule &mol, int atom) const {
  const Atom &a = mol.atom(atom);
  if (atomic_number && *atomic_number != a.atomic_number)
    return false;
  if (aromatic && *aromatic != a.aromatic)
    return false;
  if (formal_charge && *formal_charge != a.formal_charge)
    return false;
  if (total_h && *total_h != mol.total_h(atom))
    return false;
  return true;
}

bool PatternBond::matches(BondOrder order) const {
  switch (query) {
  case BondQuery::kSingleOrAromatic:
    return order == BondOrder::kSingle || order == BondOrder::kAromatic;
  case BondQuery::kSingle:
    return order == BondOrder::kSingle;
  case BondQuery::kDouble:
    return order == BondOrder::kDouble;
  case BondQuery::kTriple:
    return order == BondOrder::kTriple;
  case BondQuery::kAromatic:
    return order == BondOrder::kAromatic;
  case BondQuery::kAny:
    return true;
  }
  return false;
}

namespace {

bool is_digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }

class PatternParser {
public:
  explicit PatternParser(std::string_view text): text_(text) { }

  Pattern parse();

private:
  char peek(std::size_t off = 0) const {
    return pos_ + off < text_.size() ? text_[pos_ + off] : '\0';
  }

  [[noreturn]] void fail(ErrorKind kind, const std::string &msg,
                         std::size_t at) const {
    throw ParseError(kind, msg, at);
  }

  [[noreturn]] void unsupported(char c, std::size_t at) const {
    switch (c) {
    case '$':
      fail(ErrorKind::kUnsupported, "recursive SMARTS unsupported", at);
    case ';':
    case ',':
    case '&':
    case '!':
      fail(ErrorKind::kUnsupported,
           std::string("logical operator '") + c + "' unsupported", at);
    case '@':
    case '/':
    case '\\':
      fail(ErrorKind::kUnsupported,
           std::string("stereochemistry '") + c + "' unsupported", at);
    case '.':
      fail(ErrorKind::kUnsupported, "disconnected patterns ('.') unsupported",
           at);
    default:
      fail(ErrorKind::kUnsupported,
           std::string("SMARTS primitive '") + c + "' unsupported", at);
    }
  }

  int parse_number() {
    int value = 0;
    bool any = false;
    while (is_digit(peek())) {
      value = value * 10 + (peek() - '0');
      ++pos_;
      any = true;
    }
    return any ? value : -1;
  }

  void add_atom(PatternAtom atom, std::size_t at);
  void parse_bracket();
  void parse_ring_closure();

  std::string_view text_;
  std::size_t pos_ = 0;
  Pattern pattern_;
  std::vector<int> branch_stack_;
  std::map<int, std::pair<int, std::optional<BondQuery>>> rings_;
  std::optional<BondQuery> pending_;
  std::size_t pending_at_ = 0;
  int prev_ = -1;
};

void PatternParser::add_atom(PatternAtom atom, std::size_t at) {
  if (pattern_.atoms.size() >= kMaxPatternAtoms)
    fail(ErrorKind::kBudget,
         "pattern exceeds " + std::to_string(kMaxPatternAtoms) + " atoms", at);
  const int idx = static_cast<int>(pattern_.atoms.size());
  pattern_.atoms.push_back(atom);
  if (prev_ >= 0) {
    pattern_.bonds.push_back(
        {prev_, idx, pending_.value_or(BondQuery::kSingleOrAromatic)});
  } else if (pending_) {
    fail(ErrorKind::kSyntax, "bond without a preceding atom", pending_at_);
  }
  pending_.reset();
  prev_ = idx;
}

void PatternParser::parse_bracket() {
  const std::size_t open = pos_;
  const ElementTable &table = ElementTable::instance();
  ++pos_;
  PatternAtom atom;
  parse_number();  // isotope labels are accepted and ignored

  const std::size_t at = pos_;
  const char c = peek();
  if (c == '#') {
    ++pos_;
    const int z = parse_number();
    if (z < 0 || table.find(z) == nullptr)
      fail(ErrorKind::kSyntax, "'#' needs a valid atomic number", at);
    atom.atomic_number = z;
  } else if (c == '*') {
    ++pos_;
  } else if (c == 'A' && !std::islower(static_cast<unsigned char>(peek(1)))) {
    atom.aromatic = false;
    ++pos_;
  } else if (c == 'a' && peek(1) != 's') {
    atom.aromatic = true;
    ++pos_;
  } else if (std::isupper(static_cast<unsigned char>(c))) {
    const Element *e = nullptr;
    if (std::islower(static_cast<unsigned char>(peek(1)))) {
      e = table.find(text_.substr(pos_, 2));
      if (e != nullptr)
        pos_ += 2;
    }
    if (e == nullptr) {
      e = table.find(text_.substr(pos_, 1));
      if (e == nullptr)
        unsupported(c, at);
      ++pos_;
    }
    atom.atomic_number = e->atomic_number;
    atom.aromatic = false;
  } else if (std::islower(static_cast<unsigned char>(c))) {
    static const char *const kAromatic[] = {"se", "as", "te", "b", "c",
                                            "n",  "o",  "p",  "s"};
    std::string found;
    for (const char *sym: kAromatic) {
      if (text_.substr(pos_).starts_with(sym)) {
        found = sym;
        break;
      }
    }
    if (found.empty())
      unsupported(c, at);
    pos_ += found.size();
    found[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(found[0])));
    atom.atomic_number = table.find(found)->atomic_number;
    atom.aromatic = true;
  } else if (c == ']') {
    fail(ErrorKind::kSyntax, "empty bracket atom", open);
  } else {
    unsupported(c, at);
  }

  while (peek() != ']') {
    const char d = peek();
    if (d == '\0')
      fail(ErrorKind::kSyntax, "unterminated bracket atom", open);
    if (d == 'H') {
      ++pos_;
      const int h = parse_number();
      atom.total_h = h >= 0 ? h : 1;
    } else if (d == '+' || d == '-') {
      const int unit = d == '+' ? 1 : -1;
      ++pos_;
      const int mag = parse_number();
      if (mag >= 0) {
        atom.formal_charge = unit * mag;
      } else {
        int count = 1;
        while (peek() == d) {
          ++count;
          ++pos_;
        }
        atom.formal_charge = unit * count;
      }
    } else {
      unsupported(d, pos_);
    }
  }
  ++pos_;
  add_atom(atom, open);
}

void PatternParser::parse_ring_closure() {
  const std::size_t at = pos_;
  int label;
  if (peek() == '%') {
    if (!is_digit(peek(1)) || !is_digit(peek(2)))
      fail(ErrorKind::kSyntax, "'%' must be followed by two digits", at);
    label = (peek(1) - '0') * 10 + (peek(2) - '0');
    pos_ += 3;
  } else {
    label = peek() - '0';
    ++pos_;
  }
  if (prev_ < 0)
    fail(ErrorKind::kSyntax, "ring closure without a preceding atom", at);
  const std::optional<BondQuery> query = pending_;
  pending_.reset();
  auto it = rings_.find(label);
  if (it == rings_.end()) {
    rings_.emplace(label, std::make_pair(prev_, query));
    return;
  }
  const auto [other, other_query] = it->second;
  rings_.erase(it);
  if (other == prev_)
    fail(ErrorKind::kSyntax, "ring closure to the same atom", at);
  if (query && other_query && *query != *other_query)
    fail(ErrorKind::kSyntax, "conflicting ring-closure bonds", at);
  pattern_.bonds.push_back(
      {other, prev_,
       query.value_or(other_query.value_or(BondQuery::kSingleOrAromatic))});
}

Pattern PatternParser::parse() {
  if (text_.empty())
    fail(ErrorKind::kSyntax, "empty pattern", 0);
  const ElementTable &table = ElementTable::instance();

  while (pos_ < text_.size()) {
    const std::size_t at = pos_;
    const char c = peek();
    PatternAtom atom;
    switch (c) {
    case 'B':
    case 'C':
    case 'N':
    case 'O':
    case 'P':
    case 'S':
    case 'F':
    case 'I': {
      std::string symbol(1, c);
      if ((c == 'C' && peek(1) == 'l') || (c == 'B' && peek(1) == 'r'))
        symbol += peek(1);
      pos_ += symbol.size();
      atom.atomic_number = table.find(symbol)->atomic_number;
      atom.aromatic = false;
      add_atom(atom, at);
      break;
    }
    case 'b':
    case 'c':
    case 'n':
    case 'o':
    case 'p':
    case 's':
      atom.atomic_number =
          table.find(std::string(1, static_cast<char>(std::toupper(c))))
              ->atomic_number;
      atom.aromatic = true;
      ++pos_;
      add_atom(atom, at);
      break;
    case '*':
      ++pos_;
      add_atom(atom, at);
      break;
    case 'A':
    case 'a':
      atom.aromatic = c == 'a';
      ++pos_;
      add_atom(atom, at);
      break;
    case '[':
      parse_bracket();
      break;
    case '(':
      if (prev_ < 0)
        fail(ErrorKind::kSyntax, "branch without a preceding atom", at);
      branch_stack_.push_back(prev_);
      ++pos_;
      break;
    case ')':
      if (branch_stack_.empty())
        fail(ErrorKind::kSyntax, "unmatched ')'", at);
      if (pending_)
        fail(ErrorKind::kSyntax, "bond at end of branch", pending_at_);
      prev_ = branch_stack_.back();
      branch_stack_.pop_back();
      ++pos_;
      break;
    case '-':
    case '=':
    case '#':
    case ':':
    case '~':
      if (pending_)
        fail(ErrorKind::kSyntax, "two consecutive bonds", at);
      pending_ = c == '-'   ? BondQuery::kSingle
                 : c == '=' ? BondQuery::kDouble
                 : c == '#' ? BondQuery::kTriple
                 : c == ':' ? BondQuery::kAromatic
                            : BondQuery::kAny;
      pending_at_ = at;
      ++pos_;
      break;
    case '%':
    case '0':
    case '1':
    case '2':
    case '3':
    case '4':
    case '5':
    case '6':
    case '7':
    case '8':
    case '9':
      parse_ring_closure();
      break;
    default:
      if (std::isspace(static_cast<unsigned char>(c)))
        fail(ErrorKind::kSyntax, "whitespace inside pattern", at);
      unsupported(c, at);
    }
  }
  if (pending_)
    fail(ErrorKind::kSyntax, "dangling bond", pending_at_);
  if (!branch_stack_.empty())
    fail(ErrorKind::kSyntax, "unclosed branch '('", pos_);
  if (!rings_.empty())
    fail(ErrorKind::kUnclosedRing,
         "unclosed ring closure \"" + std::to_string(rings_.begin()->first) + "\"",
         pos_);
  pattern_.source = std::string(text_);
  return std::move(pattern_);
}

struct Plan {
  std::vector<int> order;
  // For order[k]: the already-placed pattern atom whose mol image seeds the
  // candidate list (-1 for roots) and the bond to it.
  std::vector<int> anchor;
  std::vector<int> anchor_bond;
  // Remaining bonds to earlier atoms, checked after the anchor.
  std::vector<std::vector<std::pair<int, int>>> checks;
};

Plan make_plan(const Pattern &p) {
  const int n = static_cast<int>(p.atoms.size());
  std::vector<std::vector<std::pair<int, int>>> adj(n);
  for (int b = 0; b < static_cast<int>(p.bonds.size()); ++b) {
    adj[p.bonds[b].begin].emplace_back(p.bonds[b].end, b);
    adj[p.bonds[b].end].emplace_back(p.bonds[b].begin, b);
  }
  Plan plan;
  std::vector<int> placed(n, -1);
  for (int root = 0; root < n; ++root) {
    if (placed[root] >= 0)
      continue;
    std::deque<int> queue{root};
    placed[root] = static_cast<int>(plan.order.size());
    plan.order.push_back(root);
    while (!queue.empty()) {
      const int u = queue.front();
      queue.pop_front();
      for (auto [v, b]: adj[u]) {
        if (placed[v] < 0) {
          placed[v] = static_cast<int>(plan.order.size());
          plan.order.push_back(v);
          queue.push_back(v);
        }
      }
    }
  }
  plan.anchor.assign(n, -1);
  plan.anchor_bond.assign(n, -1);
  plan.checks.resize(n);
  for (int k = 0; k < n; ++k) {
    const int u = plan.order[k];
    for (auto [v, b]: adj[u]) {
      if (placed[v] >= k)
        continue;
      if (plan.anchor[k] < 0) {
        plan.anchor[k] = v;
        plan.anchor_bond[k] = b;
      } else {
        plan.checks[k].emplace_back(v, b);
      }
    }
  }
  return plan;
}

// Calls `emit` for every embedding; stops when it returns false.
void enumerate(const Molecule &mol, const Pattern &p,
               const std::function<bool(const std::vector<int> &)> &emit) {
  if (p.atoms.size() > kMaxPatternAtoms)
    throw ParseError(ErrorKind::kBudget,
                     "pattern has " + std::to_string(p.atoms.size())
                         + " atoms; limit is "
                         + std::to_string(kMaxPatternAtoms));
  const int n = static_cast<int>(p.atoms.size());
  if (n == 0 || mol.empty())
    return;
  const Plan plan = make_plan(p);
  std::vector<int> image(n, -1);
  std::vector<bool> used(mol.num_atoms(), false);
  bool stop = false;

  std::function<void(int)> extend = [&](int k) {
    if (k == n) {
      if (!emit(image))
        stop = true;
      return;
    }
    const int u = plan.order[k];
    auto try_atom = [&](int a) {
      if (used[a] || !p.atoms[u].matches(mol, a))
        return;
      for (auto [v, b]: plan.checks[k]) {
        const auto mb = mol.bond_between(a, image[v]);
        if (!mb || !p.bonds[b].matches(mol.bond(*mb).order))
          return;
      }
      image[u] = a;
      used[a] = true;
      extend(k + 1);
      used[a] = false;
      image[u] = -1;
    };
    if (plan.anchor[k] < 0) {
      for (int a = 0; a < static_cast<int>(mol.num_atoms()) && !stop; ++a)
        try_atom(a);
    } else {
      const PatternBond &pb = p.bonds[plan.anchor_bond[k]];
      for (const Neighbor &nb: mol.neighbors(image[plan.anchor[k]])) {
        if (stop)
          break;
        if (pb.matches(mol.bond(nb.bond).order))
          try_atom(nb.atom);
      }
    }
  };
  extend(0);
}

}  // namespace

Pattern parse_pattern(std::string_view text) {
  return PatternParser(text).parse();
}

std::vector<std::vector<int>> match_pattern(const Molecule &mol,
                                            const Pattern &pattern,
                                            MatchMode mode) {
  std::vector<std::vector<int>> out;
  std::set<std::vector<int>> seen;
  enumerate(mol, pattern, [&](const std::vector<int> &image) {
    if (mode == MatchMode::kUniqueAtoms) {
      std::vector<int> key = image;
      std::sort(key.begin(), key.end());
      if (!seen.insert(std::move(key)).second)
        return true;
    }
    out.push_back(image);
    return true;
  });
  return out;
}

std::size_t count_matches(const Molecule &mol, const Pattern &pattern) {
  return match_pattern(mol, pattern, MatchMode::kUniqueAtoms).size();
}

bool has_match(const Molecule &mol, const Pattern &pattern) {
  bool found = false;
  enumerate(mol, pattern, [&](const std::vector<int> &) {
    found = true;
    return false;
  });
  return found;
}

}  // namespace llm4sd::mol
