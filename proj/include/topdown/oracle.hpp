#pragma once

#include <algorithm>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "topdown/transition.hpp"
#include "topdown/tree.hpp"

namespace topdown {

struct GoldEntry {
  std::string label;
  int start = 0;
  int end = 0;
  int preorder = 0;
};

// Precomputed gold-tree lookups for the dynamic oracle. by_start lists the
// gold constituents beginning at each index, outermost first (descending end,
// ties by pre-order position).
struct GoldIndex {
  std::map<int, std::vector<GoldEntry>> by_start;
  BracketMultiset all;
  std::map<std::pair<std::string, int>, int> open_counts;  // (label, start)
  std::map<std::pair<std::string, int>, int> max_end;
};

namespace detail {
inline void index_nodes(const Tree& t, int& pre, std::vector<GoldEntry>& out) {
  if (t.is_leaf()) return;
  out.push_back(GoldEntry{t.label, t.start, t.end, pre++});
  for (const Tree& c : t.children) index_nodes(c, pre, out);
}
}  // namespace detail

inline GoldIndex build_gold_index(const Tree& gold) {
  GoldIndex idx;
  std::vector<GoldEntry> nodes;
  int pre = 0;
  detail::index_nodes(gold, pre, nodes);
  for (const GoldEntry& e : nodes) {
    idx.by_start[e.start].push_back(e);
    idx.all[Bracket{e.label, e.start, e.end}]++;
    idx.open_counts[{e.label, e.start}]++;
    auto [it, inserted] = idx.max_end.insert({{e.label, e.start}, e.end});
    if (!inserted) it->second = std::max(it->second, e.end);
  }
  for (auto& [start, entries] : idx.by_start)
    std::sort(entries.begin(), entries.end(),
              [](const GoldEntry& a, const GoldEntry& b) {
                if (a.end != b.end) return a.end > b.end;
                return a.preorder < b.preorder;
              });
  return idx;
}

struct OracleResult {
  Action action;
  int rule = 0;  // 0 buffer-empty Close, 1 Close, 2 Open, 3 Shift
};

// The dynamic oracle for the top-down system. Rules, in order:
//   0. buffer exhausted: Close.
//   1. if the top constituent is closable and closing it now produces an
//      unproduced gold constituent, or it can never close into one later:
//      Close.
//   2. if an unopened gold constituent starts at the next unshifted word:
//      Open the outermost such.
//   3. otherwise Shift.
// A rule whose action is illegal (root Close with a nonempty buffer, Open
// caps) falls through to the next rule.
inline OracleResult oracle_action(const ParserState& state, const GoldIndex& index) {
  if (state.finished) throw UsageError("oracle_action on finished state");
  if (state.shifted == state.n) return {Action::close(), 0};

  if (!state.stack.empty() && !state.stack.back().children.empty() &&
      close_legal(state)) {
    const OpenConstituent& top = state.stack.back();
    Bracket now{top.label, top.start, state.shifted};
    auto git = index.all.find(now);
    int gold_count = git == index.all.end() ? 0 : git->second;
    auto pit = state.produced.find(now);
    int produced_count = pit == state.produced.end() ? 0 : pit->second;
    bool produces_gold = gold_count > produced_count;
    auto mit = index.max_end.find({top.label, top.start});
    bool closable_later = mit != index.max_end.end() && mit->second > state.shifted;
    if (produces_gold || !closable_later) return {Action::close(), 1};
  }

  if (open_legal(state)) {
    auto bit = index.by_start.find(state.shifted);
    if (bit != index.by_start.end()) {
      // opens already made are attributed to the outermost matching gold
      // entries; the first entry past its opened count is the one to open
      std::map<std::pair<std::string, int>, int> seen;
      for (const GoldEntry& e : bit->second) {
        std::pair<std::string, int> key{e.label, e.start};
        auto oit = state.opened.find(key);
        int opened_count = oit == state.opened.end() ? 0 : oit->second;
        if (seen[key]++ >= opened_count) return {Action::open(e.label), 2};
      }
    }
  }

  if (shift_legal(state)) return {Action::shift(), 3};
  if (close_legal(state)) return {Action::close(), 1};
  throw std::logic_error("oracle_action: no legal action (unreachable state)");
}

// Runs the oracle to completion; terminates within the transition step bound.
inline std::pair<ActionSequence, Tree> oracle_completion(ParserState state,
                                                         const GoldIndex& index) {
  if (state.finished) throw UsageError("oracle_completion on finished state");
  ActionSequence actions;
  int bound = state.cfg.step_bound(state.n);
  while (!state.finished) {
    if (static_cast<int>(actions.size()) > bound)
      throw std::logic_error("oracle_completion exceeded the step bound");
    OracleResult r = oracle_action(state, index);
    state = apply(state, r.action);
    actions.push_back(r.action);
  }
  return {std::move(actions), *state.root};
}

}  // namespace topdown
