#pragma once

#include <chrono>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "topdown/decode.hpp"
#include "topdown/evalf1.hpp"
#include "topdown/grammar.hpp"
#include "topdown/oracle.hpp"
#include "topdown/scorer.hpp"

namespace topdown {

enum class Procedure {
  likelihood,
  policy_gradient,
  likelihood_explore,
  smm,
  smm_explore,
};

inline const char* procedure_name(Procedure p) {
  switch (p) {
    case Procedure::likelihood: return "likelihood";
    case Procedure::policy_gradient: return "policy_gradient";
    case Procedure::likelihood_explore: return "likelihood_explore";
    case Procedure::smm: return "smm";
    case Procedure::smm_explore: return "smm_explore";
  }
  return "?";
}

inline Procedure parse_procedure(const std::string& name) {
  if (name == "likelihood") return Procedure::likelihood;
  if (name == "policy_gradient") return Procedure::policy_gradient;
  if (name == "likelihood_explore") return Procedure::likelihood_explore;
  if (name == "smm") return Procedure::smm;
  if (name == "smm_explore") return Procedure::smm_explore;
  throw ConfigError("unknown training procedure: " + name);
}

inline bool uses_exploration(Procedure p) {
  return p == Procedure::policy_gradient || p == Procedure::likelihood_explore ||
         p == Procedure::smm_explore;
}

struct TrainConfig {
  Procedure procedure = Procedure::likelihood;
  int k = 10;
  int epochs = 10;
  int batch_size = 16;
  double lr = 0.5;
  double lr_decay = 0.02;  // lr_t = lr / (1 + decay * updates)
  std::uint64_t seed = 1;
  int eval_every = 1;
  int dev_beam_width = 1;  // 1 = greedy
  double margin = 1.0;
  double init_scale = 0.01;
  // estimator test modes; leave both on for normal training
  bool standardize = true;
  bool gold_augment = true;
  TransitionConfig trans;

  void validate() const {
    if (epochs < 1 || batch_size < 1 || lr <= 0 || lr_decay < 0 ||
        eval_every < 1 || dev_beam_width < 1)
      throw ConfigError("train config: all counts and rates must be positive");
    if (uses_exploration(procedure) && k < 2)
      throw ConfigError("train config: exploration procedures need k >= 2");
  }
};

struct EpochRecord {
  int epoch = 0;
  double dev_f1 = 0;
  double mean_train_cost = 0;
  long standardizer_count = 0;
  double standardizer_mean = 0;
  double standardizer_stddev = 0;
  double seconds = 0;  // reported to the console, not part of report files
};

struct TrainReport {
  std::vector<EpochRecord> epochs;
  int best_epoch = 0;
  double best_dev_f1 = 0;
};

inline F1Score evaluate_dev(const ScorerParams& params, const Corpus& dev,
                            const TrainConfig& config) {
  std::vector<std::pair<Tree, Tree>> pairs;
  pairs.reserve(dev.size());
  for (const auto& [sent, gold] : dev) {
    Candidate c = config.dev_beam_width > 1
                      ? decode_beam(sent, params, config.dev_beam_width, config.trans)
                      : decode_greedy(sent, params, config.trans);
    pairs.emplace_back(std::move(c.tree), gold);
  }
  return corpus_f1(pairs);
}

// Risk-gradient contribution of one candidate: weight * sum_t dlog p(a_t|s_t).
inline FeatureVector candidate_risk_gradient(const Sentence& sentence,
                                             const Candidate& cand,
                                             const ScorerParams& params,
                                             double weight,
                                             TransitionConfig cfg = {}) {
  FeatureVector g;
  ParserState s = initial_state(sentence, cfg);
  for (const Action& a : cand.actions) {
    axpy(weight, grad_log_prob(s, sentence, params, a), g);
    s = apply(s, a);
  }
  return g;
}

namespace detail {

// Sums dlog p(a*|s) over every state along `actions`, with the oracle's
// action as target; used by all oracle-supervised procedures.
inline void accumulate_oracle_grad(const Sentence& sentence, const ActionSequence& actions,
                                   const GoldIndex& gold_index, const ScorerParams& params,
                                   bool use_margin, double margin, TransitionConfig cfg,
                                   FeatureVector& grad) {
  ParserState s = initial_state(sentence, cfg);
  for (const Action& a : actions) {
    Action target = oracle_action(s, gold_index).action;
    GradOptions opts;
    if (use_margin) {
      opts.use_margin = true;
      opts.margin_target = target;
      opts.margin = margin;
    }
    axpy(1.0, grad_log_prob(s, sentence, params, target, opts), grad);
    s = apply(s, a);
    if (s.finished) break;
  }
}

}  // namespace detail

// One training loop shared by the five procedures; they differ only in which
// states are visited and which per-state loss is ascended. Sentences are
// processed in corpus order; candidate generation streams costs through a
// single RunningStandardizer so runs are reproducible.
inline std::pair<ScorerParams, TrainReport> train(const Corpus& corpus,
                                                  const Corpus& dev,
                                                  const TrainConfig& config) {
  config.validate();
  if (corpus.empty()) throw ConfigError("train: empty corpus");

  // label inventory from the training trees
  std::vector<std::string> labels;
  {
    std::set<std::string> seen;
    for (const auto& [sent, tree] : corpus)
      for (const auto& [b, c] : brackets(tree)) seen.insert(b.label);
    labels.assign(seen.begin(), seen.end());
  }
  ScorerParams params = make_params(labels, config.seed, config.init_scale);

  std::vector<GoldIndex> gold_indices;
  std::vector<ActionSequence> gold_actions;
  gold_indices.reserve(corpus.size());
  gold_actions.reserve(corpus.size());
  for (const auto& [sent, tree] : corpus) {
    gold_indices.push_back(build_gold_index(tree));
    gold_actions.push_back(tree_to_actions(tree));
  }

  RunningStandardizer standardizer;
  TrainReport report;
  ScorerParams best_params = params;
  long updates = 0;
  bool margin_proc =
      config.procedure == Procedure::smm || config.procedure == Procedure::smm_explore;

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    auto t0 = std::chrono::steady_clock::now();
    double cost_sum = 0;
    long cost_count = 0;
    size_t i = 0;
    while (i < corpus.size()) {
      size_t batch_end = std::min(corpus.size(), i + config.batch_size);
      FeatureVector grad;  // ascent direction
      for (; i < batch_end; ++i) {
        const auto& [sent, gold] = corpus[i];
        switch (config.procedure) {
          case Procedure::likelihood:
          case Procedure::smm: {
            ParserState s = initial_state(sent, config.trans);
            for (const Action& a : gold_actions[i]) {
              GradOptions opts;
              if (margin_proc) {
                opts.use_margin = true;
                opts.margin_target = a;
                opts.margin = config.margin;
              }
              FeatureVector g = grad_log_prob(s, sent, params, a, opts);
              cost_sum += -score(s, sent, params).log_prob(a);
              axpy(1.0, g, grad);
              s = apply(s, a);
            }
            ++cost_count;
            break;
          }
          case Procedure::policy_gradient:
          case Procedure::likelihood_explore:
          case Procedure::smm_explore: {
            std::mt19937_64 rng = sentence_rng(config.seed, i, epoch);
            CandidateSet set = build_candidate_set(sent, gold, params, config.k, rng,
                                                   standardizer, config.trans);
            for (const Candidate& c : set.candidates) {
              if (!config.gold_augment && c.is_gold) continue;
              cost_sum += c.cost;
              ++cost_count;
              if (config.procedure == Procedure::policy_gradient) {
                double w = config.standardize ? c.standardized_cost : c.cost;
                // descend the risk gradient = ascend its negation
                axpy(1.0, candidate_risk_gradient(sent, c, params, -w, config.trans),
                     grad);
              } else {
                detail::accumulate_oracle_grad(
                    sent, c.actions, gold_indices[i], params,
                    config.procedure == Procedure::smm_explore, config.margin,
                    config.trans, grad);
              }
            }
            break;
          }
        }
      }
      double lr_t = config.lr / (1.0 + config.lr_decay * updates);
      for (const auto& [id, v] : grad) params.add(id, lr_t * v);
      ++updates;
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.mean_train_cost = cost_count > 0 ? cost_sum / cost_count : 0.0;
    rec.standardizer_count = standardizer.count;
    rec.standardizer_mean = standardizer.mean;
    rec.standardizer_stddev = standardizer.stddev();
    if (epoch % config.eval_every == 0 || epoch == config.epochs) {
      rec.dev_f1 = dev.empty() ? 0.0 : evaluate_dev(params, dev, config).f1;
      if (report.epochs.empty() || rec.dev_f1 > report.best_dev_f1) {
        report.best_dev_f1 = rec.dev_f1;
        report.best_epoch = epoch;
        best_params = params;
      }
    } else {
      rec.dev_f1 = report.epochs.empty() ? 0.0 : report.epochs.back().dev_f1;
    }
    rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                      .count();
    report.epochs.push_back(rec);
  }
  if (dev.empty()) best_params = params;
  return {std::move(best_params), std::move(report)};
}

}  // namespace topdown
