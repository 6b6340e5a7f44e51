#pragma once

#include <array>
#include <cctype>
#include <cstdint>
#include <cstdlib>
#include <memory>
#include <string>
#include <vector>

#include "trailwatch/error.hpp"
#include "trailwatch/tags.hpp"

namespace trailwatch {

// ---------------------------------------------------------------------------
// Atom vocabulary
//
// The context of one tourist is a complete assignment over these 25 atoms:
// every factor (wind, fog, temperature, rain, avalanche, difficulty,
// day/night, season) contributes exactly one true atom. Variables are
// 1-based; Tseitin auxiliaries start above kAtomCount.
// ---------------------------------------------------------------------------

constexpr int kAtomCount = 25;

inline const char* atom_name(int id) {
  static const char* names[kAtomCount + 1] = {
      "",   "W1", "W2", "W3", "F1", "F2", "F3", "T1", "T2",     "T3",
      "R1", "R2", "R3", "A1", "A2", "A3", "A4", "A5", "D1",     "D2",
      "D3", "D4", "Day", "Night", "Summer", "Winter"};
  return names[id];
}

inline int atom_from_name(const std::string& name) {
  for (int i = 1; i <= kAtomCount; ++i)
    if (name == atom_name(i)) return i;
  throw VocabularyError("unknown atom '" + name + "'");
}

/// One tourist's complete factor assignment; source of the one-hot closure.
struct ContextAtoms {
  WeatherTags tags;
  Avalanche avalanche = Avalanche::A1;
  Difficulty difficulty = Difficulty::D1;
  DayNight day_night = DayNight::Day;
  Season season = Season::Summer;

  /// assignment[v] for v in 1..kAtomCount; exactly one true per factor group.
  std::array<bool, kAtomCount + 1> assignment() const {
    std::array<bool, kAtomCount + 1> a{};
    a[0 + static_cast<int>(tags.wind)] = true;        // W1..W3 -> 1..3
    a[3 + static_cast<int>(tags.fog)] = true;         // F1..F3 -> 4..6
    a[6 + static_cast<int>(tags.temperature)] = true; // T1..T3 -> 7..9
    a[9 + static_cast<int>(tags.rain)] = true;        // R1..R3 -> 10..12
    a[12 + static_cast<int>(avalanche)] = true;       // A1..A5 -> 13..17
    a[17 + static_cast<int>(difficulty)] = true;      // D1..D4 -> 18..21
    a[day_night == DayNight::Day ? 22 : 23] = true;
    a[season == Season::Summer ? 24 : 25] = true;
    return a;
  }
};

// ---------------------------------------------------------------------------
// Propositional formulas: immutable trees with a tiny text grammar.
//   expr   := or ;  or := and ("OR" and)* ;  and := unary ("AND" unary)*
//   unary  := "NOT" unary | "(" expr ")" | atom
// ---------------------------------------------------------------------------

class Formula {
 public:
  enum class Kind : std::uint8_t { Atom, Not, And, Or };

  struct Node {
    Kind kind;
    int atom = 0;  // valid for Kind::Atom
    std::vector<std::shared_ptr<const Node>> kids;
  };

  static Formula atom(int id) {
    if (id < 1 || id > kAtomCount) throw VocabularyError("atom index out of range");
    return Formula(std::make_shared<Node>(Node{Kind::Atom, id, {}}));
  }

  static Formula negation(const Formula& f) {
    return Formula(std::make_shared<Node>(Node{Kind::Not, 0, {f.root_}}));
  }

  static Formula conjunction(std::vector<Formula> fs) { return nary(Kind::And, std::move(fs)); }
  static Formula disjunction(std::vector<Formula> fs) { return nary(Kind::Or, std::move(fs)); }

  const Node& root() const { return *root_; }

  std::string text() const {
    std::string out;
    print(*root_, &out, /*parent_or=*/false);
    return out;
  }

  static Formula parse(const std::string& text);

 private:
  explicit Formula(std::shared_ptr<const Node> n) : root_(std::move(n)) {}

  static Formula nary(Kind k, std::vector<Formula> fs) {
    if (fs.empty()) throw std::invalid_argument("n-ary formula needs operands");
    if (fs.size() == 1) return fs[0];
    Node n{k, 0, {}};
    for (auto& f : fs) n.kids.push_back(f.root_);
    return Formula(std::make_shared<Node>(std::move(n)));
  }

  static void print(const Node& n, std::string* out, bool parenthesize) {
    switch (n.kind) {
      case Kind::Atom:
        *out += atom_name(n.atom);
        return;
      case Kind::Not:
        *out += "NOT ";
        if (n.kids[0]->kind == Kind::And || n.kids[0]->kind == Kind::Or) {
          *out += "(";
          print(*n.kids[0], out, false);
          *out += ")";
        } else {
          print(*n.kids[0], out, false);
        }
        return;
      case Kind::And:
      case Kind::Or: {
        const bool need = parenthesize;
        if (need) *out += "(";
        for (std::size_t i = 0; i < n.kids.size(); ++i) {
          if (i) *out += n.kind == Kind::And ? " AND " : " OR ";
          const auto& kid = *n.kids[i];
          const bool kid_paren =
              (n.kind == Kind::And && kid.kind == Kind::Or) ||
              (n.kind == Kind::Or && kid.kind == Kind::And) ||
              (kid.kind == n.kind);
          print(kid, out, kid_paren);
        }
        if (need) *out += ")";
        return;
      }
    }
  }

  std::shared_ptr<const Node> root_;
};

namespace logic_detail {

struct FormulaParser {
  const std::string& s;
  std::size_t pos = 0;

  explicit FormulaParser(const std::string& text) : s(text) {}

  [[noreturn]] void fail(const std::string& msg) const {
    throw VocabularyError("formula '" + s + "': " + msg);
  }

  void skip_ws() {
    while (pos < s.size() && (s[pos] == ' ' || s[pos] == '\t')) ++pos;
  }

  bool eat(char c) {
    skip_ws();
    if (pos < s.size() && s[pos] == c) {
      ++pos;
      return true;
    }
    return false;
  }

  std::string word() {
    skip_ws();
    std::size_t start = pos;
    while (pos < s.size() && (std::isalnum(static_cast<unsigned char>(s[pos])) || s[pos] == '_'))
      ++pos;
    return s.substr(start, pos - start);
  }

  std::string peek_word() {
    const std::size_t save = pos;
    std::string w = word();
    pos = save;
    return w;
  }

  Formula parse_or() {
    std::vector<Formula> terms{parse_and()};
    while (peek_word() == "OR") {
      word();
      terms.push_back(parse_and());
    }
    return Formula::disjunction(std::move(terms));
  }

  Formula parse_and() {
    std::vector<Formula> terms{parse_unary()};
    while (peek_word() == "AND") {
      word();
      terms.push_back(parse_unary());
    }
    return Formula::conjunction(std::move(terms));
  }

  Formula parse_unary() {
    skip_ws();
    if (eat('(')) {
      Formula inner = parse_or();
      if (!eat(')')) fail("missing ')'");
      return inner;
    }
    const std::string w = word();
    if (w.empty()) fail("expected atom, NOT, or '('");
    if (w == "NOT") return Formula::negation(parse_unary());
    if (w == "AND" || w == "OR") fail("operator '" + w + "' needs a left operand");
    return Formula::atom(atom_from_name(w));
  }

  Formula run() {
    Formula f = parse_or();
    skip_ws();
    if (pos != s.size()) fail("trailing characters at position " + std::to_string(pos));
    return f;
  }
};

}  // namespace logic_detail

inline Formula Formula::parse(const std::string& text) {
  return logic_detail::FormulaParser(text).run();
}

// ---------------------------------------------------------------------------
// CNF + DPLL
// ---------------------------------------------------------------------------

/// Clause set in conjunctive normal form. Literals are signed 1-based
/// variable indices. Clauses are non-empty at construction; the empty clause
/// only ever arises inside the solver as a conflict.
struct Cnf {
  int num_vars = 0;
  std::vector<std::vector<int>> clauses;

  void add_clause(std::vector<int> lits) {
    if (lits.empty()) throw std::invalid_argument("empty clause at construction");
    for (int l : lits) {
      if (l == 0 || std::abs(l) > num_vars)
        throw std::invalid_argument("literal " + std::to_string(l) +
                                    " outside variable range");
    }
    clauses.push_back(std::move(lits));
  }
};

struct SatResult {
  bool satisfiable = false;
  std::vector<std::int8_t> assignment;  // 1-based; 0/1; meaningful when satisfiable
};

/// Plain DPLL: unit propagation, pure-literal elimination, deterministic
/// branching on the lowest unassigned variable trying true first. Instances
/// here are tens of variables, so clarity and determinism win over clever
/// data structures. Every SAT answer is model-checked before it is returned.
class DpllSolver {
 public:
  struct Stats {
    std::uint64_t calls = 0;
    std::uint64_t decisions = 0;
    std::uint64_t propagations = 0;
  };

  SatResult solve(const Cnf& cnf) {
    ++stats_.calls;
    std::vector<std::int8_t> assign(static_cast<std::size_t>(cnf.num_vars) + 1, -1);
    SatResult result;
    result.satisfiable = dpll(cnf, assign);
    if (result.satisfiable) {
      for (auto& v : assign)
        if (v < 0) v = 0;  // don't-care variables default to false
      verify_model(cnf, assign);
      result.assignment = std::move(assign);
    }
    return result;
  }

  const Stats& stats() const { return stats_; }

 private:
  static bool literal_true(int lit, const std::vector<std::int8_t>& a) {
    const std::int8_t v = a[static_cast<std::size_t>(std::abs(lit))];
    return v >= 0 && (lit > 0) == (v == 1);
  }
  static bool literal_false(int lit, const std::vector<std::int8_t>& a) {
    const std::int8_t v = a[static_cast<std::size_t>(std::abs(lit))];
    return v >= 0 && (lit > 0) == (v == 0);
  }

  bool dpll(const Cnf& cnf, std::vector<std::int8_t>& assign) {
    // Propagate to fixpoint: units first, then pure literals.
    for (;;) {
      bool changed = false;
      for (const auto& clause : cnf.clauses) {
        int unassigned_lit = 0;
        int unassigned_count = 0;
        bool satisfied = false;
        for (int lit : clause) {
          if (literal_true(lit, assign)) {
            satisfied = true;
            break;
          }
          if (!literal_false(lit, assign)) {
            ++unassigned_count;
            unassigned_lit = lit;
          }
        }
        if (satisfied) continue;
        if (unassigned_count == 0) return false;  // conflict
        if (unassigned_count == 1) {
          assign[static_cast<std::size_t>(std::abs(unassigned_lit))] =
              unassigned_lit > 0 ? 1 : 0;
          ++stats_.propagations;
          changed = true;
        }
      }
      if (changed) continue;

      // Pure literal pass over not-yet-satisfied clauses.
      // polarity: bit0 = positive occurrence, bit1 = negative.
      std::vector<std::uint8_t> polarity(static_cast<std::size_t>(cnf.num_vars) + 1, 0);
      bool any_open = false;
      for (const auto& clause : cnf.clauses) {
        bool satisfied = false;
        for (int lit : clause)
          if (literal_true(lit, assign)) {
            satisfied = true;
            break;
          }
        if (satisfied) continue;
        any_open = true;
        for (int lit : clause) {
          if (literal_false(lit, assign)) continue;
          polarity[static_cast<std::size_t>(std::abs(lit))] |= lit > 0 ? 1 : 2;
        }
      }
      if (!any_open) return true;  // every clause satisfied

      bool assigned_pure = false;
      for (int v = 1; v <= cnf.num_vars; ++v) {
        if (assign[static_cast<std::size_t>(v)] >= 0) continue;
        const std::uint8_t p = polarity[static_cast<std::size_t>(v)];
        if (p == 1 || p == 2) {
          assign[static_cast<std::size_t>(v)] = (p == 1) ? 1 : 0;
          ++stats_.propagations;
          assigned_pure = true;
        }
      }
      if (!assigned_pure) break;
    }

    // Branch: lowest unassigned variable, true first.
    int branch_var = 0;
    for (int v = 1; v <= cnf.num_vars; ++v) {
      if (assign[static_cast<std::size_t>(v)] < 0) {
        branch_var = v;
        break;
      }
    }
    if (branch_var == 0) {
      // Everything assigned; propagation loop above would have returned on
      // conflict, and with no open clause it returns true, so reaching here
      // means some clause is still open with no unassigned literal: conflict.
      return false;
    }
    for (std::int8_t value : {std::int8_t{1}, std::int8_t{0}}) {
      ++stats_.decisions;
      std::vector<std::int8_t> saved = assign;
      assign[static_cast<std::size_t>(branch_var)] = value;
      if (dpll(cnf, assign)) return true;
      assign = std::move(saved);
    }
    return false;
  }

  static void verify_model(const Cnf& cnf, const std::vector<std::int8_t>& assign) {
    for (const auto& clause : cnf.clauses) {
      bool ok = false;
      for (int lit : clause)
        if (literal_true(lit, assign)) {
          ok = true;
          break;
        }
      if (!ok) throw std::logic_error("solver returned a non-model; internal bug");
    }
  }

  Stats stats_;
};

// ---------------------------------------------------------------------------
// Entailment encoding: S |= A decided by UNSAT of S AND NOT A.
// ---------------------------------------------------------------------------

namespace logic_detail {

/// Tseitin translation. Returns the literal representing the subformula and
/// appends defining clauses; NOT is folded into literal polarity for free.
inline int tseitin(const Formula::Node& n, Cnf* cnf) {
  switch (n.kind) {
    case Formula::Kind::Atom:
      return n.atom;
    case Formula::Kind::Not:
      return -tseitin(*n.kids[0], cnf);
    case Formula::Kind::And: {
      std::vector<int> kid_lits;
      for (const auto& k : n.kids) kid_lits.push_back(tseitin(*k, cnf));
      const int g = ++cnf->num_vars;
      std::vector<int> back{g};
      for (int kl : kid_lits) {
        cnf->add_clause({-g, kl});  // g -> kl
        back.push_back(-kl);       // (AND kids) -> g
      }
      cnf->add_clause(std::move(back));
      return g;
    }
    case Formula::Kind::Or: {
      std::vector<int> kid_lits;
      for (const auto& k : n.kids) kid_lits.push_back(tseitin(*k, cnf));
      const int g = ++cnf->num_vars;
      std::vector<int> fwd{-g};
      for (int kl : kid_lits) {
        cnf->add_clause({g, -kl});  // kl -> g
        fwd.push_back(kl);          // g -> (OR kids)
      }
      cnf->add_clause(std::move(fwd));
      return g;
    }
  }
  throw std::logic_error("unreachable formula kind");
}

}  // namespace logic_detail

/// CNF for S AND NOT A, where S is the complete one-hot context assignment
/// (each factor's true atom asserted, every sibling atom denied) and A is the
/// alert formula. UNSAT of the result is exactly S |= A.
inline Cnf encode_entailment(const ContextAtoms& s, const Formula& a) {
  Cnf cnf;
  cnf.num_vars = kAtomCount;
  const auto assignment = s.assignment();
  for (int v = 1; v <= kAtomCount; ++v)
    cnf.add_clause({assignment[static_cast<std::size_t>(v)] ? v : -v});
  const int root = logic_detail::tseitin(a.root(), &cnf);
  cnf.add_clause({-root});
  return cnf;
}

inline bool entails(const ContextAtoms& s, const Formula& a, DpllSolver* solver) {
  return !solver->solve(encode_entailment(s, a)).satisfiable;
}

}  // namespace trailwatch
