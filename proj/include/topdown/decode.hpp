#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "topdown/evalf1.hpp"
#include "topdown/scorer.hpp"
#include "topdown/transition.hpp"

namespace topdown {

struct Candidate {
  Tree tree;
  ActionSequence actions;
  double log_prob = 0;
  bool is_gold = false;
  double cost = 0;
  double standardized_cost = 0;
};

// k candidates for one sentence: k-1 samples plus the gold tree.
struct CandidateSet {
  Sentence sentence;
  Tree gold;
  std::vector<Candidate> candidates;
};

// Per-sentence RNG stream derived from (global seed, sentence index, epoch).
inline std::mt19937_64 sentence_rng(std::uint64_t global_seed,
                                    std::uint64_t sentence_index,
                                    std::uint64_t epoch) {
  std::uint64_t s = detail::splitmix64(global_seed);
  s = detail::splitmix64(s ^ (0xa0761d6478bd642full * (sentence_index + 1)));
  s = detail::splitmix64(s ^ (0xe7037ed1a0b428dbull * (epoch + 1)));
  return std::mt19937_64(s);
}

namespace detail {

inline double uniform01(std::mt19937_64& rng) {
  return (rng() >> 11) * 0x1.0p-53;
}

// Categorical draw from log probabilities; hand-rolled so runs are
// reproducible across standard libraries.
inline int sample_index(const std::vector<double>& log_probs,
                        std::mt19937_64& rng) {
  double u = uniform01(rng);
  double acc = 0;
  for (size_t i = 0; i < log_probs.size(); ++i) {
    acc += std::exp(log_probs[i]);
    if (u < acc) return static_cast<int>(i);
  }
  return static_cast<int>(log_probs.size()) - 1;
}

}  // namespace detail

// Ancestral sampling from the model distribution. The legality mask plus the
// open caps guarantee termination.
inline Candidate sample_tree(const Sentence& sentence, const ScorerParams& params,
                             std::mt19937_64& rng, TransitionConfig cfg = {}) {
  ParserState s = initial_state(sentence, cfg);
  Candidate c;
  while (!s.finished) {
    ActionDistribution dist = score(s, sentence, params);
    int i = detail::sample_index(dist.log_probs, rng);
    c.log_prob += dist.log_probs[i];
    c.actions.push_back(dist.actions[i]);
    s = apply(s, dist.actions[i]);
  }
  c.tree = *s.root;
  return c;
}

// Argmax action at every step; ties broken by the fixed action ordering
// (Shift < Open by label < Close), which is the order score() emits.
inline Candidate decode_greedy(const Sentence& sentence, const ScorerParams& params,
                               TransitionConfig cfg = {}) {
  ParserState s = initial_state(sentence, cfg);
  Candidate c;
  while (!s.finished) {
    ActionDistribution dist = score(s, sentence, params);
    int best = 0;
    for (size_t i = 1; i < dist.log_probs.size(); ++i)
      if (dist.log_probs[i] > dist.log_probs[best]) best = static_cast<int>(i);
    c.log_prob += dist.log_probs[best];
    c.actions.push_back(dist.actions[best]);
    s = apply(s, dist.actions[best]);
  }
  c.tree = *s.root;
  return c;
}

// Action-level beam over partial derivations scored by cumulative log prob.
// Finished hypotheses are held aside and compete by total log prob, without
// length normalization.
inline Candidate decode_beam(const Sentence& sentence, const ScorerParams& params,
                             int width, TransitionConfig cfg = {}) {
  if (width < 1) throw UsageError("decode_beam: width must be >= 1");
  struct Hyp {
    ParserState state;
    ActionSequence actions;
    double log_prob = 0;
  };
  std::vector<Hyp> beam;
  beam.push_back(Hyp{initial_state(sentence, cfg), {}, 0.0});
  // the greedy derivation seeds the incumbent, so a pruned greedy prefix can
  // never leave the beam result below the greedy one
  Candidate best = decode_greedy(sentence, params, cfg);
  bool have_best = true;
  int bound = cfg.step_bound(static_cast<int>(sentence.size()));
  for (int step = 0; step <= bound && !beam.empty(); ++step) {
    std::vector<Hyp> next;
    next.reserve(beam.size() * 4);
    for (Hyp& h : beam) {
      ActionDistribution dist = score(h.state, sentence, params);
      for (size_t i = 0; i < dist.actions.size(); ++i) {
        Hyp nh;
        nh.state = apply(h.state, dist.actions[i]);
        nh.actions = h.actions;
        nh.actions.push_back(dist.actions[i]);
        nh.log_prob = h.log_prob + dist.log_probs[i];
        if (nh.state.finished) {
          if (!have_best || nh.log_prob > best.log_prob) {
            best.tree = *nh.state.root;
            best.actions = std::move(nh.actions);
            best.log_prob = nh.log_prob;
            have_best = true;
          }
        } else {
          next.push_back(std::move(nh));
        }
      }
    }
    if (static_cast<int>(next.size()) > width)
      std::stable_sort(next.begin(), next.end(),
                       [](const Hyp& a, const Hyp& b) { return a.log_prob > b.log_prob; });
    if (static_cast<int>(next.size()) > width) next.resize(width);
    beam = std::move(next);
  }
  if (!have_best) throw std::logic_error("decode_beam: no finished hypothesis");
  return best;
}

// k-1 samples (duplicates kept) plus the gold tree; every candidate's cost is
// streamed through the shared standardizer in candidate order.
inline CandidateSet build_candidate_set(const Sentence& sentence, const Tree& gold,
                                        const ScorerParams& params, int k,
                                        std::mt19937_64& rng,
                                        RunningStandardizer& standardizer,
                                        TransitionConfig cfg = {}) {
  if (k < 2) throw UsageError("build_candidate_set: k must be >= 2");
  CandidateSet set;
  set.sentence = sentence;
  set.gold = gold;
  for (int i = 0; i < k - 1; ++i)
    set.candidates.push_back(sample_tree(sentence, params, rng, cfg));
  Candidate gold_cand;
  gold_cand.tree = gold;
  gold_cand.actions = tree_to_actions(gold);
  gold_cand.is_gold = true;
  gold_cand.log_prob = 0;
  for (ParserState s = initial_state(sentence, cfg); const Action& a : gold_cand.actions) {
    gold_cand.log_prob += score(s, sentence, params).log_prob(a);
    s = apply(s, a);
  }
  set.candidates.push_back(std::move(gold_cand));
  for (Candidate& c : set.candidates) {
    c.cost = cost(c.tree, gold);
    c.standardized_cost = standardizer.standardize(c.cost);
  }
  return set;
}

}  // namespace topdown
