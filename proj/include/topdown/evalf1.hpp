#pragma once

#include <cmath>
#include <span>
#include <utility>
#include <vector>

#include "topdown/tree.hpp"

namespace topdown {

struct F1Score {
  double precision = 0;
  double recall = 0;
  double f1 = 0;
  long matched = 0;
  long predicted = 0;
  long gold = 0;
};

inline F1Score f1_from_counts(long matched, long predicted, long gold) {
  F1Score s;
  s.matched = matched;
  s.predicted = predicted;
  s.gold = gold;
  s.precision = predicted > 0 ? static_cast<double>(matched) / predicted : 0.0;
  s.recall = gold > 0 ? static_cast<double>(matched) / gold : 0.0;
  s.f1 = (s.precision + s.recall) > 0
             ? 2 * s.precision * s.recall / (s.precision + s.recall)
             : 0.0;
  return s;
}

// Labeled bracketing F1 via multiset intersection. include_root matches the
// sentence-level reward convention; pass false for evalb compatibility.
inline F1Score labeled_f1(const Tree& pred, const Tree& gold,
                          bool include_root = true) {
  if (pred.end != gold.end || pred.start != gold.start)
    throw UsageError("labeled_f1: trees cover different spans");
  BracketMultiset p = brackets(pred, include_root);
  BracketMultiset g = brackets(gold, include_root);
  return f1_from_counts(multiset_intersection_size(p, g), total_count(p),
                        total_count(g));
}

// Micro-averaged corpus F1 (sums of counts, then P/R/F1).
inline F1Score corpus_f1(std::span<const std::pair<Tree, Tree>> pairs,
                         bool include_root = true) {
  long matched = 0, predicted = 0, gold = 0;
  for (const auto& [p, g] : pairs) {
    F1Score s = labeled_f1(p, g, include_root);
    matched += s.matched;
    predicted += s.predicted;
    gold += s.gold;
  }
  return f1_from_counts(matched, predicted, gold);
}

// The training cost: negative labeled F1, in [-1, 0].
inline double cost(const Tree& pred, const Tree& gold) {
  return -labeled_f1(pred, gold).f1;
}

// Streaming mean/population-std normalizer for candidate costs. Update with
// the new value first, then normalize against the post-update statistics.
struct RunningStandardizer {
  long count = 0;
  double mean = 0;
  double m2 = 0;  // sum of squared deviations
  double epsilon = 1e-8;

  double variance() const { return count > 0 ? m2 / count : 0.0; }
  double stddev() const { return std::sqrt(variance()); }

  double standardize(double value) {
    if (!std::isfinite(value))
      throw UsageError("standardize: non-finite value");
    ++count;
    double delta = value - mean;
    mean += delta / count;
    m2 += delta * (value - mean);
    if (m2 < 0) m2 = 0;
    if (count < 2) return 0.0;
    return (value - mean) / std::max(stddev(), epsilon);
  }
};

}  // namespace topdown
