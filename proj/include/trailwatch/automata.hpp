#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "trailwatch/error.hpp"

namespace trailwatch {

// ---------------------------------------------------------------------------
// Threat alphabet: 10 closed symbols. "E6mE3" style strings are sequences of
// these tokens, never composite symbols.
// ---------------------------------------------------------------------------

enum class ThreatToken : std::uint8_t {
  N = 0,
  E6a = 1,
  E6g = 2,
  E6m = 3,
  E6r = 4,
  E2 = 5,
  E3 = 6,
  E4 = 7,
  E5 = 8,
  Sep = 9,
};

constexpr int kThreatTokenCount = 10;

inline const char* token_label(ThreatToken t) {
  static const char* labels[kThreatTokenCount] = {"N",  "E6a", "E6g", "E6m", "E6r",
                                                  "E2", "E3",  "E4",  "E5",  ";"};
  return labels[static_cast<int>(t)];
}

/// Longest-match tokenizer for threat strings such as "E6mE3" or "N;E6g".
/// Whitespace between tokens is permitted; anything else is a vocabulary
/// error.
inline std::vector<ThreatToken> tokenize_threats(const std::string& text) {
  static const std::array<ThreatToken, kThreatTokenCount> by_length_desc = {
      ThreatToken::E6a, ThreatToken::E6g, ThreatToken::E6m, ThreatToken::E6r,
      ThreatToken::E2,  ThreatToken::E3,  ThreatToken::E4,  ThreatToken::E5,
      ThreatToken::N,   ThreatToken::Sep};
  std::vector<ThreatToken> out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    if (text[pos] == ' ' || text[pos] == '\t') {
      ++pos;
      continue;
    }
    bool matched = false;
    for (ThreatToken t : by_length_desc) {
      const std::string label = token_label(t);
      if (text.compare(pos, label.size(), label) == 0) {
        out.push_back(t);
        pos += label.size();
        matched = true;
        break;
      }
    }
    if (!matched)
      throw VocabularyError("threat string '" + text + "': unknown symbol at position " +
                            std::to_string(pos));
  }
  return out;
}

inline std::string token_string(const std::vector<ThreatToken>& tokens) {
  std::string out;
  for (ThreatToken t : tokens) out += token_label(t);
  return out;
}

// ---------------------------------------------------------------------------
// Regular expressions over the threat alphabet.
// ---------------------------------------------------------------------------

class Regex {
 public:
  enum class Kind : std::uint8_t { Literal, Concat, Alt, Plus, Star };

  struct Node {
    Kind kind;
    ThreatToken literal = ThreatToken::N;  // valid for Kind::Literal
    std::vector<std::shared_ptr<const Node>> kids;
  };

  static Regex literal(ThreatToken t) {
    return Regex(std::make_shared<Node>(Node{Kind::Literal, t, {}}));
  }
  static Regex concat(std::vector<Regex> parts) { return nary(Kind::Concat, std::move(parts)); }
  static Regex alt(std::vector<Regex> parts) { return nary(Kind::Alt, std::move(parts)); }
  static Regex plus(const Regex& r) {
    return Regex(std::make_shared<Node>(Node{Kind::Plus, ThreatToken::N, {r.root_}}));
  }
  static Regex star(const Regex& r) {
    return Regex(std::make_shared<Node>(Node{Kind::Star, ThreatToken::N, {r.root_}}));
  }

  const Node& root() const { return *root_; }

 private:
  explicit Regex(std::shared_ptr<const Node> n) : root_(std::move(n)) {}

  static Regex nary(Kind k, std::vector<Regex> parts) {
    if (parts.empty()) throw std::invalid_argument("regex n-ary node needs operands");
    if (parts.size() == 1) return parts[0];
    Node n{k, ThreatToken::N, {}};
    for (auto& p : parts) n.kids.push_back(p.root_);
    return Regex(std::make_shared<Node>(std::move(n)));
  }

  std::shared_ptr<const Node> root_;
};

// ---------------------------------------------------------------------------
// NFA with epsilon moves (Thompson construction output).
// ---------------------------------------------------------------------------

struct Nfa {
  int num_states = 0;
  int initial = 0;
  std::vector<std::array<std::vector<int>, kThreatTokenCount>> moves;
  std::vector<std::vector<int>> eps;
  std::vector<bool> accepting;

  int add_state() {
    moves.emplace_back();
    eps.emplace_back();
    accepting.push_back(false);
    return num_states++;
  }
};

namespace automata_detail {

struct Fragment {
  int start;
  int end;
};

inline Fragment thompson(const Regex::Node& n, Nfa* nfa) {
  switch (n.kind) {
    case Regex::Kind::Literal: {
      const int s = nfa->add_state();
      const int e = nfa->add_state();
      nfa->moves[static_cast<std::size_t>(s)][static_cast<int>(n.literal)].push_back(e);
      return {s, e};
    }
    case Regex::Kind::Concat: {
      Fragment first = thompson(*n.kids[0], nfa);
      Fragment acc = first;
      for (std::size_t i = 1; i < n.kids.size(); ++i) {
        Fragment next = thompson(*n.kids[i], nfa);
        nfa->eps[static_cast<std::size_t>(acc.end)].push_back(next.start);
        acc.end = next.end;
      }
      return acc;
    }
    case Regex::Kind::Alt: {
      const int s = nfa->add_state();
      const int e = nfa->add_state();
      for (const auto& kid : n.kids) {
        Fragment f = thompson(*kid, nfa);
        nfa->eps[static_cast<std::size_t>(s)].push_back(f.start);
        nfa->eps[static_cast<std::size_t>(f.end)].push_back(e);
      }
      return {s, e};
    }
    case Regex::Kind::Plus: {
      Fragment f = thompson(*n.kids[0], nfa);
      const int s = nfa->add_state();
      const int e = nfa->add_state();
      nfa->eps[static_cast<std::size_t>(s)].push_back(f.start);
      nfa->eps[static_cast<std::size_t>(f.end)].push_back(e);
      nfa->eps[static_cast<std::size_t>(f.end)].push_back(f.start);  // repeat
      return {s, e};
    }
    case Regex::Kind::Star: {
      Fragment f = thompson(*n.kids[0], nfa);
      const int s = nfa->add_state();
      const int e = nfa->add_state();
      nfa->eps[static_cast<std::size_t>(s)].push_back(f.start);
      nfa->eps[static_cast<std::size_t>(s)].push_back(e);  // zero repeats
      nfa->eps[static_cast<std::size_t>(f.end)].push_back(e);
      nfa->eps[static_cast<std::size_t>(f.end)].push_back(f.start);
      return {s, e};
    }
  }
  throw std::logic_error("unreachable regex kind");
}

inline void eps_close(const Nfa& nfa, std::set<int>* states) {
  std::vector<int> stack(states->begin(), states->end());
  while (!stack.empty()) {
    const int s = stack.back();
    stack.pop_back();
    for (int t : nfa.eps[static_cast<std::size_t>(s)]) {
      if (states->insert(t).second) stack.push_back(t);
    }
  }
}

}  // namespace automata_detail

inline Nfa compile_regex(const Regex& r) {
  Nfa nfa;
  const automata_detail::Fragment f = automata_detail::thompson(r.root(), &nfa);
  nfa.initial = f.start;
  nfa.accepting[static_cast<std::size_t>(f.end)] = true;
  return nfa;
}

/// Direct subset simulation of the NFA. This is the reference semantics the
/// DFA pipeline must agree with.
inline bool nfa_accepts(const Nfa& nfa, const std::vector<ThreatToken>& input) {
  std::set<int> current{nfa.initial};
  automata_detail::eps_close(nfa, &current);
  for (ThreatToken t : input) {
    std::set<int> next;
    for (int s : current)
      for (int d : nfa.moves[static_cast<std::size_t>(s)][static_cast<int>(t)])
        next.insert(d);
    automata_detail::eps_close(nfa, &next);
    current = std::move(next);
    if (current.empty()) return false;
  }
  for (int s : current)
    if (nfa.accepting[static_cast<std::size_t>(s)]) return true;
  return false;
}

// ---------------------------------------------------------------------------
// DFA: deterministic and total (every state has a move on every token; a trap
// state absorbs illegal continuations).
// ---------------------------------------------------------------------------

struct Dfa {
  int num_states = 0;
  int initial = 0;
  std::vector<std::array<int, kThreatTokenCount>> next;
  std::vector<bool> accepting;

  bool accepts(const std::vector<ThreatToken>& input) const {
    int s = initial;
    for (ThreatToken t : input)
      s = next[static_cast<std::size_t>(s)][static_cast<int>(t)];
    return accepting[static_cast<std::size_t>(s)];
  }
};

/// Powerset construction over epsilon closures. Subset keys are sorted state
/// vectors, so state numbering is deterministic (discovery order from a map
/// walk is itself deterministic given the NFA). The empty subset becomes the
/// trap state whenever some token has no continuation.
inline Dfa determinize(const Nfa& nfa) {
  using Subset = std::vector<int>;
  Dfa dfa;
  std::map<Subset, int> ids;
  std::vector<Subset> order;

  auto intern = [&](Subset subset) {
    auto [it, inserted] = ids.try_emplace(std::move(subset), dfa.num_states);
    if (inserted) {
      ++dfa.num_states;
      order.push_back(it->first);
      dfa.next.emplace_back();
      bool acc = false;
      for (int s : it->first)
        if (nfa.accepting[static_cast<std::size_t>(s)]) acc = true;
      dfa.accepting.push_back(acc);
    }
    return it->second;
  };

  std::set<int> start{nfa.initial};
  automata_detail::eps_close(nfa, &start);
  dfa.initial = intern(Subset(start.begin(), start.end()));

  for (int i = 0; i < dfa.num_states; ++i) {
    const Subset current = order[static_cast<std::size_t>(i)];  // copy: order may grow
    for (int t = 0; t < kThreatTokenCount; ++t) {
      std::set<int> target;
      for (int s : current)
        for (int d : nfa.moves[static_cast<std::size_t>(s)][t]) target.insert(d);
      automata_detail::eps_close(nfa, &target);
      dfa.next[static_cast<std::size_t>(i)][t] = intern(Subset(target.begin(), target.end()));
    }
  }
  return dfa;
}

/// Hopcroft partition refinement. Input must be total; unreachable states are
/// discarded first so the result is the canonical minimal acceptor. Block
/// numbering follows the lowest original state id in each block, keeping the
/// output deterministic.
inline Dfa minimize(const Dfa& dfa) {
  // Reachability restriction.
  std::vector<int> reach_id(static_cast<std::size_t>(dfa.num_states), -1);
  std::vector<int> reachable;
  reach_id[static_cast<std::size_t>(dfa.initial)] = 0;
  reachable.push_back(dfa.initial);
  for (std::size_t i = 0; i < reachable.size(); ++i) {
    for (int t = 0; t < kThreatTokenCount; ++t) {
      const int d = dfa.next[static_cast<std::size_t>(reachable[i])][t];
      if (reach_id[static_cast<std::size_t>(d)] < 0) {
        reach_id[static_cast<std::size_t>(d)] = static_cast<int>(reachable.size());
        reachable.push_back(d);
      }
    }
  }
  const int n = static_cast<int>(reachable.size());
  std::vector<std::array<int, kThreatTokenCount>> next(static_cast<std::size_t>(n));
  std::vector<bool> accepting(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    accepting[static_cast<std::size_t>(i)] =
        dfa.accepting[static_cast<std::size_t>(reachable[static_cast<std::size_t>(i)])];
    for (int t = 0; t < kThreatTokenCount; ++t)
      next[static_cast<std::size_t>(i)][t] = reach_id[static_cast<std::size_t>(
          dfa.next[static_cast<std::size_t>(reachable[static_cast<std::size_t>(i)])][t])];
  }

  // Hopcroft: refine {accepting, rejecting} against (splitter, token) pairs.
  std::vector<int> block_of(static_cast<std::size_t>(n));
  std::vector<std::vector<int>> blocks;
  {
    std::vector<int> acc, rej;
    for (int i = 0; i < n; ++i) (accepting[static_cast<std::size_t>(i)] ? acc : rej).push_back(i);
    if (!acc.empty()) blocks.push_back(std::move(acc));
    if (!rej.empty()) blocks.push_back(std::move(rej));
    for (std::size_t b = 0; b < blocks.size(); ++b)
      for (int s : blocks[b]) block_of[static_cast<std::size_t>(s)] = static_cast<int>(b);
  }

  // Inverse transition table.
  std::vector<std::array<std::vector<int>, kThreatTokenCount>> prev(static_cast<std::size_t>(n));
  for (int s = 0; s < n; ++s)
    for (int t = 0; t < kThreatTokenCount; ++t)
      prev[static_cast<std::size_t>(next[static_cast<std::size_t>(s)][t])][t].push_back(s);

  std::vector<std::pair<int, int>> worklist;  // (block index, token)
  for (std::size_t b = 0; b < blocks.size(); ++b)
    for (int t = 0; t < kThreatTokenCount; ++t) worklist.emplace_back(static_cast<int>(b), t);

  while (!worklist.empty()) {
    const auto [splitter, token] = worklist.back();
    worklist.pop_back();

    // X = states with a `token`-move into the splitter block.
    std::set<int> x;
    for (int s : blocks[static_cast<std::size_t>(splitter)])
      for (int p : prev[static_cast<std::size_t>(s)][token]) x.insert(p);
    if (x.empty()) continue;

    const std::size_t block_count = blocks.size();
    for (std::size_t b = 0; b < block_count; ++b) {
      std::vector<int> inside, outside;
      for (int s : blocks[b]) (x.count(s) ? inside : outside).push_back(s);
      if (inside.empty() || outside.empty()) continue;

      blocks[b] = std::move(inside);
      const int nb = static_cast<int>(blocks.size());
      blocks.push_back(std::move(outside));
      for (int s : blocks.back()) block_of[static_cast<std::size_t>(s)] = nb;

      // Standard Hopcroft bookkeeping: if (b, t) was pending, both halves
      // must be pending; otherwise the smaller half suffices.
      for (int t = 0; t < kThreatTokenCount; ++t) {
        bool pending = false;
        for (auto& w : worklist)
          if (w.first == static_cast<int>(b) && w.second == t) {
            pending = true;
            break;
          }
        if (pending) {
          worklist.emplace_back(nb, t);
        } else {
          const bool b_smaller = blocks[b].size() <= blocks[static_cast<std::size_t>(nb)].size();
          worklist.emplace_back(b_smaller ? static_cast<int>(b) : nb, t);
        }
      }
    }
  }

  // Renumber blocks by their lowest member for a canonical result.
  std::vector<int> block_order(blocks.size());
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    int lowest = n;
    for (int s : blocks[b]) lowest = std::min(lowest, s);
    block_order[b] = lowest;
  }
  std::vector<std::size_t> sorted_blocks(blocks.size());
  for (std::size_t b = 0; b < blocks.size(); ++b) sorted_blocks[b] = b;
  std::sort(sorted_blocks.begin(), sorted_blocks.end(),
            [&](std::size_t a, std::size_t b) { return block_order[a] < block_order[b]; });
  std::vector<int> new_id(blocks.size());
  for (std::size_t i = 0; i < sorted_blocks.size(); ++i)
    new_id[sorted_blocks[i]] = static_cast<int>(i);

  Dfa out;
  out.num_states = static_cast<int>(blocks.size());
  out.next.resize(static_cast<std::size_t>(out.num_states));
  out.accepting.resize(static_cast<std::size_t>(out.num_states));
  out.initial = new_id[static_cast<std::size_t>(block_of[static_cast<std::size_t>(0)])];
  // State 0 of the reachable numbering is the initial state by construction.
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    const int id = new_id[b];
    const int representative = blocks[b][0];
    out.accepting[static_cast<std::size_t>(id)] =
        accepting[static_cast<std::size_t>(representative)];
    for (int t = 0; t < kThreatTokenCount; ++t)
      out.next[static_cast<std::size_t>(id)][t] =
          new_id[static_cast<std::size_t>(block_of[static_cast<std::size_t>(
              next[static_cast<std::size_t>(representative)][t])])];
  }
  return out;
}

// ---------------------------------------------------------------------------
// The trace language: one block per completed assessment cycle.
//   S ::= E6a | E6g | E6m | E6r        (situational part)
//   W ::= E2 | E3 | E4 | E5            (weather part)
//   E ::= N | S | W | S W              (one assessment)
//   L ::= (E ';')+                     (a behavior trace)
// ---------------------------------------------------------------------------

inline Regex situational_regex() {
  return Regex::alt({Regex::literal(ThreatToken::E6a), Regex::literal(ThreatToken::E6g),
                     Regex::literal(ThreatToken::E6m), Regex::literal(ThreatToken::E6r)});
}

inline Regex weather_regex() {
  return Regex::alt({Regex::literal(ThreatToken::E2), Regex::literal(ThreatToken::E3),
                     Regex::literal(ThreatToken::E4), Regex::literal(ThreatToken::E5)});
}

inline Regex assessment_regex() {
  return Regex::alt({Regex::literal(ThreatToken::N), situational_regex(), weather_regex(),
                     Regex::concat({situational_regex(), weather_regex()})});
}

inline Regex trace_regex() {
  return Regex::plus(Regex::concat({assessment_regex(), Regex::literal(ThreatToken::Sep)}));
}

/// Minimal acceptor for the trace language; built once, five states.
inline const Dfa& threat_trace_acceptor() {
  static const Dfa dfa = minimize(determinize(compile_regex(trace_regex())));
  return dfa;
}

}  // namespace trailwatch
