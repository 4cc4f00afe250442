//
// Project llm4sd - Copyright 2026 The llm4sd Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "llm4sd/molgraph/smiles.hpp"

#include <cctype>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "llm4sd/molgraph/element.hpp"

namespace llm4sd::mol {
namespace {

struct PendingBond {
  char symbol = 0;
  std::size_t position = 0;
};

struct RingOpen {
  int atom;
  char symbol;
  std::size_t position;
};

struct ParsedBond {
  Bond bond;
  bool implicit;
};

// Directional bonds carry only stereo intent; their order is inferred like an
// unmarked bond.
bool directional(char c) { return c == '/' || c == '\\'; }

std::optional<BondOrder> order_from_symbol(char c) {
  switch (c) {
  case '-':
  case '/':
  case '\\':
    return BondOrder::kSingle;
  case '=':
    return BondOrder::kDouble;
  case '#':
    return BondOrder::kTriple;
  case ':':
    return BondOrder::kAromatic;
  default:
    return std::nullopt;
  }
}

class SmilesParser {
public:
  explicit SmilesParser(std::string_view text): text_(text) { }

  Molecule parse();

private:
  char peek(std::size_t off = 0) const {
    return pos_ + off < text_.size() ? text_[pos_ + off] : '\0';
  }

  [[noreturn]] void fail(ErrorKind kind, const std::string &msg,
                         std::size_t at) const {
    throw ParseError(kind, msg, at);
  }

  void stereo_dropped() {
    if (!stereo_warned_) {
      warnings_.emplace_back("stereochemistry marks ignored");
      stereo_warned_ = true;
    }
  }

  int add_atom(Atom atom, std::size_t at);
  void parse_organic();
  void parse_bracket();
  void parse_ring_closure();
  void take_bond_symbol();
  int parse_number();

  std::string_view text_;
  std::size_t pos_ = 0;
  std::vector<Atom> atoms_;
  std::vector<std::size_t> positions_;
  std::vector<ParsedBond> bonds_;
  std::vector<int> branch_stack_;
  std::map<int, RingOpen> rings_;
  std::optional<PendingBond> pending_;
  int prev_ = -1;
  bool stereo_warned_ = false;
  std::vector<std::string> warnings_;
};

int SmilesParser::add_atom(Atom atom, std::size_t at) {
  const int idx = static_cast<int>(atoms_.size());
  atom.index = idx;
  atoms_.push_back(atom);
  positions_.push_back(at);
  if (prev_ >= 0) {
    ParsedBond pb{{prev_, idx, BondOrder::kSingle}, true};
    if (pending_ && !directional(pending_->symbol)) {
      pb.bond.order = *order_from_symbol(pending_->symbol);
      pb.implicit = false;
    } else if (atoms_[prev_].aromatic && atom.aromatic) {
      pb.bond.order = BondOrder::kAromatic;
    }
    bonds_.push_back(pb);
  } else if (pending_) {
    fail(ErrorKind::kSyntax, "bond symbol without a preceding atom",
         pending_->position);
  }
  pending_.reset();
  prev_ = idx;
  return idx;
}

void SmilesParser::parse_organic() {
  const std::size_t at = pos_;
  const ElementTable &table = ElementTable::instance();
  const char c = peek();
  Atom atom;
  std::string symbol(1, c);
  if (c == 'C' && peek(1) == 'l')
    symbol = "Cl";
  else if (c == 'B' && peek(1) == 'r')
    symbol = "Br";
  if (std::islower(static_cast<unsigned char>(c))) {
    atom.aromatic = true;
    symbol[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  }
  pos_ += symbol.size();
  atom.atomic_number = table.find(symbol)->atomic_number;
  add_atom(atom, at);
}

int SmilesParser::parse_number() {
  int value = 0;
  bool any = false;
  while (std::isdigit(static_cast<unsigned char>(peek()))) {
    value = value * 10 + (peek() - '0');
    ++pos_;
    any = true;
  }
  return any ? value : -1;
}

void SmilesParser::parse_bracket() {
  const std::size_t open = pos_;
  const ElementTable &table = ElementTable::instance();
  ++pos_;
  Atom atom;
  atom.explicit_h = 0;

  const int isotope = parse_number();
  if (isotope >= 0)
    atom.isotope = isotope;

  const std::size_t sym_at = pos_;
  const char c = peek();
  if (c == '*')
    fail(ErrorKind::kUnknownElement, "wildcard atom '*' is not supported",
         sym_at);
  if (std::isupper(static_cast<unsigned char>(c))) {
    const Element *e = nullptr;
    if (std::islower(static_cast<unsigned char>(peek(1)))) {
      e = table.find(text_.substr(pos_, 2));
      if (e != nullptr)
        pos_ += 2;
    }
    if (e == nullptr) {
      e = table.find(text_.substr(pos_, 1));
      if (e == nullptr)
        fail(ErrorKind::kUnknownElement,
             "unknown element '" + std::string(text_.substr(pos_, 1)) + "'",
             sym_at);
      ++pos_;
    }
    atom.atomic_number = e->atomic_number;
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
      fail(ErrorKind::kUnknownElement,
           "unknown aromatic element '" + std::string(1, c) + "'", sym_at);
    pos_ += found.size();
    found[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(found[0])));
    atom.atomic_number = table.find(found)->atomic_number;
    atom.aromatic = true;
  } else {
    fail(ErrorKind::kSyntax, "expected element symbol in bracket atom",
         sym_at);
  }

  if (peek() == '@') {
    stereo_dropped();
    ++pos_;
    if (peek() == '@') {
      ++pos_;
    } else if (std::isupper(static_cast<unsigned char>(peek()))
               && std::isupper(static_cast<unsigned char>(peek(1)))) {
      pos_ += 2;
      parse_number();
    }
  }

  if (peek() == 'H') {
    ++pos_;
    const int h = parse_number();
    atom.explicit_h = h >= 0 ? h : 1;
  }

  if (peek() == '+' || peek() == '-') {
    const char sign = peek();
    const int unit = sign == '+' ? 1 : -1;
    ++pos_;
    const int mag = parse_number();
    if (mag >= 0) {
      atom.formal_charge = unit * mag;
    } else {
      int count = 1;
      while (peek() == sign) {
        ++count;
        ++pos_;
      }
      atom.formal_charge = unit * count;
    }
  }

  if (peek() == ':') {
    ++pos_;
    if (parse_number() < 0)
      fail(ErrorKind::kSyntax, "atom class needs a number", pos_);
  }

  if (peek() != ']')
    fail(ErrorKind::kSyntax, "unterminated bracket atom", open);
  ++pos_;
  add_atom(atom, open);
}

void SmilesParser::parse_ring_closure() {
  const std::size_t at = pos_;
  int label;
  if (peek() == '%') {
    ++pos_;
    if (!std::isdigit(static_cast<unsigned char>(peek()))
        || !std::isdigit(static_cast<unsigned char>(peek(1))))
      fail(ErrorKind::kSyntax, "'%' must be followed by two digits", at);
    label = (peek() - '0') * 10 + (peek(1) - '0');
    pos_ += 2;
  } else {
    label = peek() - '0';
    ++pos_;
  }
  if (prev_ < 0)
    fail(ErrorKind::kSyntax, "ring closure without a preceding atom", at);

  const char symbol = pending_ ? pending_->symbol : 0;
  pending_.reset();
  auto it = rings_.find(label);
  if (it == rings_.end()) {
    rings_.emplace(label, RingOpen{prev_, symbol, at});
    return;
  }
  const RingOpen ro = it->second;
  rings_.erase(it);
  if (ro.atom == prev_)
    fail(ErrorKind::kSyntax, "ring closure to the same atom", at);
  char use = symbol != 0 ? symbol : ro.symbol;
  if (symbol != 0 && ro.symbol != 0 && *order_from_symbol(symbol) != *order_from_symbol(ro.symbol))
    fail(ErrorKind::kSyntax,
         "conflicting bond symbols for ring closure " + std::to_string(label),
         at);
  if (directional(use))
    use = 0;
  ParsedBond pb{{ro.atom, prev_, BondOrder::kSingle}, use == 0};
  if (use != 0)
    pb.bond.order = *order_from_symbol(use);
  else if (atoms_[ro.atom].aromatic && atoms_[prev_].aromatic)
    pb.bond.order = BondOrder::kAromatic;
  for (const ParsedBond &b: bonds_) {
    if ((b.bond.begin == ro.atom && b.bond.end == prev_)
        || (b.bond.begin == prev_ && b.bond.end == ro.atom))
      fail(ErrorKind::kSyntax,
           "ring closure " + std::to_string(label) + " duplicates a bond", at);
  }
  bonds_.push_back(pb);
}

void SmilesParser::take_bond_symbol() {
  const char c = peek();
  if (c == '$')
    fail(ErrorKind::kUnsupported, "quadruple bonds are not supported", pos_);
  if (pending_)
    fail(ErrorKind::kSyntax, "two consecutive bond symbols", pos_);
  if (c == '/' || c == '\\')
    stereo_dropped();
  pending_ = PendingBond{c, pos_};
  ++pos_;
}

Molecule SmilesParser::parse() {
  if (text_.empty())
    fail(ErrorKind::kSyntax, "empty SMILES", 0);

  while (pos_ < text_.size()) {
    const char c = peek();
    if (std::isspace(static_cast<unsigned char>(c)))
      break;
    switch (c) {
    case 'B':
    case 'C':
    case 'N':
    case 'O':
    case 'P':
    case 'S':
    case 'F':
    case 'I':
    case 'b':
    case 'c':
    case 'n':
    case 'o':
    case 'p':
    case 's':
      parse_organic();
      break;
    case '[':
      parse_bracket();
      break;
    case '(':
      if (prev_ < 0)
        fail(ErrorKind::kSyntax, "branch without a preceding atom", pos_);
      if (pending_)
        fail(ErrorKind::kSyntax, "bond symbol before branch", pending_->position);
      branch_stack_.push_back(prev_);
      ++pos_;
      break;
    case ')':
      if (branch_stack_.empty())
        fail(ErrorKind::kSyntax, "unmatched ')'", pos_);
      if (pending_)
        fail(ErrorKind::kSyntax, "bond symbol at end of branch",
             pending_->position);
      prev_ = branch_stack_.back();
      branch_stack_.pop_back();
      ++pos_;
      break;
    case '-':
    case '=':
    case '#':
    case ':':
    case '/':
    case '\\':
    case '$':
      take_bond_symbol();
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
    case '.':
      if (pending_)
        fail(ErrorKind::kSyntax, "bond symbol before '.'", pending_->position);
      if (!branch_stack_.empty())
        fail(ErrorKind::kSyntax, "'.' inside a branch", pos_);
      prev_ = -1;
      ++pos_;
      break;
    case '*':
      fail(ErrorKind::kUnknownElement, "wildcard atom '*' is not supported",
           pos_);
    default:
      fail(ErrorKind::kSyntax, std::string("unexpected character '") + c + "'",
           pos_);
    }
  }

  if (pending_)
    fail(ErrorKind::kSyntax, "dangling bond symbol", pending_->position);
  if (!branch_stack_.empty())
    fail(ErrorKind::kSyntax, "unclosed branch '('", pos_);
  if (!rings_.empty()) {
    const auto &[label, ro] = *rings_.begin();
    const std::string shown = label < 10 ? std::to_string(label)
                                         : "%" + std::to_string(label);
    fail(ErrorKind::kUnclosedRing, "unclosed ring closure \"" + shown + "\"",
         ro.position);
  }
  if (atoms_.empty())
    fail(ErrorKind::kSyntax, "no atoms", 0);

  // An unmarked bond between two aromatic atoms that is not on a cycle
  // (biaryl links) is single.
  std::vector<Bond> bonds;
  bonds.reserve(bonds_.size());
  for (const ParsedBond &pb: bonds_)
    bonds.push_back(pb.bond);
  std::vector<bool> cyclic(bonds.size(), false);
  for (const auto &ring: smallest_rings(static_cast<int>(atoms_.size()), bonds))
    for (int e: ring)
      cyclic[e] = true;
  for (std::size_t e = 0; e < bonds.size(); ++e)
    if (bonds_[e].implicit && bonds[e].order == BondOrder::kAromatic && !cyclic[e])
      bonds[e].order = BondOrder::kSingle;

  return Molecule::from_graph(std::move(atoms_), std::move(bonds),
                              std::string(text_.substr(0, pos_)),
                              std::move(positions_), std::move(warnings_));
}

}  // namespace

Molecule parse_smiles(std::string_view text) {
  return SmilesParser(text).parse();
}

}  // namespace llm4sd::mol
