#pragma once

#include <compare>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "topdown/tree.hpp"

namespace topdown {

class TransitionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ActionKind { Shift = 0, Open = 1, Close = 2 };

// Open(label) | Shift | Close. Ordering (Shift < Open by label < Close) is
// the fixed tie-break order used by greedy decoding.
struct Action {
  ActionKind kind = ActionKind::Shift;
  std::string label;  // Open only

  static Action shift() { return Action{ActionKind::Shift, {}}; }
  static Action open(std::string l) { return Action{ActionKind::Open, std::move(l)}; }
  static Action close() { return Action{ActionKind::Close, {}}; }

  auto operator<=>(const Action&) const = default;

  std::string str() const {
    switch (kind) {
      case ActionKind::Shift: return "SHIFT";
      case ActionKind::Close: return "REDUCE";
      case ActionKind::Open: return "NT(" + label + ")";
    }
    return {};
  }
};

inline Action parse_action(const std::string& tok) {
  if (tok == "SHIFT") return Action::shift();
  if (tok == "REDUCE") return Action::close();
  if (tok.size() > 4 && tok.compare(0, 3, "NT(") == 0 && tok.back() == ')')
    return Action::open(tok.substr(3, tok.size() - 4));
  throw TransitionError("unrecognized action token: " + tok);
}

using ActionSequence = std::vector<Action>;

inline std::string actions_str(const ActionSequence& actions) {
  std::string out;
  for (const Action& a : actions) {
    if (!out.empty()) out += ' ';
    out += a.str();
  }
  return out;
}

inline ActionSequence parse_actions(const std::string& text) {
  ActionSequence out;
  std::stringstream ss(text);
  std::string tok;
  while (ss >> tok) out.push_back(parse_action(tok));
  return out;
}

// Caps guaranteeing termination of any legal action path.
struct TransitionConfig {
  int open_chain_cap = 8;           // max consecutive Opens
  int open_total_base = 8;          // open_total_cap(n) = mult*n + base
  int open_total_mult = 4;

  int open_total_cap(int n) const { return open_total_mult * n + open_total_base; }
  int step_bound(int n) const { return n + 2 * open_total_cap(n); }
};

struct OpenConstituent {
  std::string label;
  int start = 0;                // fixed at the shifted count when opened
  std::vector<Tree> children;  // completed subtrees and shifted leaves
};

// Value-semantic parser state for the top-down Open/Shift/Close system.
struct ParserState {
  std::vector<OpenConstituent> stack;
  int shifted = 0;
  int n = 0;
  bool finished = false;
  std::optional<Tree> root;
  BracketMultiset produced;                       // closed constituents
  std::map<std::pair<std::string, int>, int> opened;  // (label, start) opens
  int open_chain = 0;   // consecutive Opens since last Shift/Close
  int total_opens = 0;
  std::optional<Action> last_action;
  TransitionConfig cfg;
};

inline ParserState initial_state(const Sentence& sentence,
                                 TransitionConfig cfg = {}) {
  if (sentence.empty()) throw UsageError("initial_state: empty sentence");
  ParserState s;
  s.n = static_cast<int>(sentence.size());
  s.cfg = cfg;
  return s;
}

inline bool shift_legal(const ParserState& s) {
  return !s.finished && s.shifted < s.n && !s.stack.empty();
}

// Legality of Open with any label; inventory membership is the caller's.
inline bool open_legal(const ParserState& s) {
  return !s.finished && s.shifted < s.n &&
         s.open_chain < s.cfg.open_chain_cap &&
         s.total_opens < s.cfg.open_total_cap(s.n);
}

inline bool close_legal(const ParserState& s) {
  if (s.finished || s.stack.empty()) return false;
  if (s.stack.back().children.empty()) return false;
  // the root may not close while words remain unshifted
  return s.stack.size() > 1 || s.shifted == s.n;
}

inline bool action_legal(const ParserState& s, const Action& a) {
  switch (a.kind) {
    case ActionKind::Shift: return shift_legal(s);
    case ActionKind::Open: return open_legal(s);
    case ActionKind::Close: return close_legal(s);
  }
  return false;
}

// Canonical order: Shift, Opens by label order, Close.
inline ActionSequence legal_actions(const ParserState& s,
                                    const std::vector<std::string>& labels) {
  if (s.finished) throw UsageError("legal_actions on finished state");
  ActionSequence out;
  if (shift_legal(s)) out.push_back(Action::shift());
  if (open_legal(s))
    for (const std::string& l : labels) out.push_back(Action::open(l));
  if (close_legal(s)) out.push_back(Action::close());
  return out;
}

inline ParserState apply(const ParserState& state, const Action& a) {
  ParserState s = state;
  switch (a.kind) {
    case ActionKind::Open: {
      if (!open_legal(s)) {
        if (s.finished) throw TransitionError("Open on finished state");
        if (s.shifted >= s.n) throw TransitionError("Open with empty buffer");
        if (s.open_chain >= s.cfg.open_chain_cap)
          throw TransitionError("Open exceeds consecutive-open cap");
        throw TransitionError("Open exceeds total-open cap");
      }
      s.stack.push_back(OpenConstituent{a.label, s.shifted, {}});
      s.opened[{a.label, s.shifted}]++;
      ++s.open_chain;
      ++s.total_opens;
      break;
    }
    case ActionKind::Shift: {
      if (!shift_legal(s)) {
        if (s.finished) throw TransitionError("Shift on finished state");
        if (s.stack.empty()) throw TransitionError("Shift with empty stack");
        throw TransitionError("Shift with empty buffer");
      }
      s.stack.back().children.push_back(Tree::leaf(s.shifted));
      ++s.shifted;
      s.open_chain = 0;
      break;
    }
    case ActionKind::Close: {
      if (!close_legal(s)) {
        if (s.finished) throw TransitionError("Close on finished state");
        if (s.stack.empty()) throw TransitionError("Close with empty stack");
        if (s.stack.back().children.empty())
          throw TransitionError("Close of childless constituent");
        throw TransitionError("Close of root before buffer exhausted");
      }
      OpenConstituent top = std::move(s.stack.back());
      s.stack.pop_back();
      Tree node;
      node.label = std::move(top.label);
      node.start = top.start;
      node.end = s.shifted;
      node.children = std::move(top.children);
      s.produced[Bracket{node.label, node.start, node.end}]++;
      if (s.stack.empty()) {
        s.root = std::move(node);
        s.finished = true;
      } else {
        s.stack.back().children.push_back(std::move(node));
      }
      s.open_chain = 0;
      break;
    }
  }
  s.last_action = a;
  return s;
}

namespace detail {
inline void linearize(const Tree& t, ActionSequence& out) {
  if (t.is_leaf()) {
    out.push_back(Action::shift());
    return;
  }
  out.push_back(Action::open(t.label));
  for (const Tree& c : t.children) linearize(c, out);
  out.push_back(Action::close());
}
}  // namespace detail

// Canonical depth-first pre-order linearization: Open on entry, Shift per
// leaf, Close on exit.
inline ActionSequence tree_to_actions(const Tree& tree) {
  ActionSequence out;
  detail::linearize(tree, out);
  return out;
}

inline Tree actions_to_tree(const Sentence& sentence, const ActionSequence& actions,
                            TransitionConfig cfg = {}) {
  ParserState s = initial_state(sentence, cfg);
  for (const Action& a : actions) {
    if (s.finished) throw TransitionError("action after finished state");
    s = apply(s, a);
  }
  if (!s.finished) throw TransitionError("action sequence does not finish the parse");
  return *s.root;
}

}  // namespace topdown
