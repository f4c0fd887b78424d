#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "topdown/transition.hpp"
#include "topdown/tree.hpp"

namespace topdown {

inline constexpr std::uint32_t kFeatureBuckets = 1u << 22;
inline constexpr const char* kFeatureTemplateVersion = "loglin-v1";

// Sparse vector over hashed feature ids.
using FeatureVector = std::unordered_map<std::uint32_t, double>;

inline void axpy(double a, const FeatureVector& x, FeatureVector& y) {
  for (const auto& [id, v] : x) y[id] += a * v;
}

inline double dot(const FeatureVector& a, const FeatureVector& b) {
  const FeatureVector& small = a.size() <= b.size() ? a : b;
  const FeatureVector& large = a.size() <= b.size() ? b : a;
  double s = 0;
  for (const auto& [id, v] : small) {
    auto it = large.find(id);
    if (it != large.end()) s += v * it->second;
  }
  return s;
}

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

inline std::uint32_t feature_bucket(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ull;  // FNV-1a
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return static_cast<std::uint32_t>(h & (kFeatureBuckets - 1));
}

}  // namespace detail

// Log-linear weights. Untouched buckets read as small deterministic
// pseudo-random values derived from init_seed, so any two models built from
// the same seed share the same initialization without materializing 2^22
// entries.
struct ScorerParams {
  std::vector<std::string> labels;
  std::string template_version = kFeatureTemplateVersion;
  std::uint64_t init_seed = 0;
  double init_scale = 0.01;
  std::unordered_map<std::uint32_t, double> weights;

  double init_value(std::uint32_t id) const {
    std::uint64_t h = detail::splitmix64(init_seed ^ (0x51ed2701ull + id));
    double u = (h >> 11) * 0x1.0p-53;  // [0, 1)
    return init_scale * (2.0 * u - 1.0);
  }
  double weight(std::uint32_t id) const {
    auto it = weights.find(id);
    return it != weights.end() ? it->second : init_value(id);
  }
  void add(std::uint32_t id, double delta) {
    auto [it, inserted] = weights.try_emplace(id, init_value(id));
    it->second += delta;
  }
};

inline ScorerParams make_params(std::vector<std::string> labels,
                                std::uint64_t seed, double init_scale = 0.01) {
  ScorerParams p;
  p.labels = std::move(labels);
  p.init_seed = seed;
  p.init_scale = init_scale;
  return p;
}

namespace detail {

// State-side feature strings; every emitted feature is a state x action
// conjunction, which covers the word-action conjunction templates.
inline std::vector<std::string> state_features(const ParserState& s,
                                               const Sentence& sent) {
  std::vector<std::string> f;
  f.reserve(16);
  f.push_back("bias");
  int depth = static_cast<int>(s.stack.size());
  if (depth == 0) {
    f.push_back("stack=empty");
  } else {
    const auto& s0 = s.stack.back();
    f.push_back("s0l=" + s0.label);
    f.push_back("s0w=" + std::to_string(s.shifted - s0.start));
    f.push_back("s0c=" + std::to_string(std::min<int>(3, (int)s0.children.size())));
    if (depth >= 2) {
      const auto& s1 = s.stack[depth - 2];
      f.push_back("s1l=" + s1.label);
      f.push_back("s0s1=" + s0.label + "+" + s1.label);
    }
    if (depth >= 3) f.push_back("s2l=" + s.stack[depth - 3].label);
  }
  f.push_back("depth=" + std::to_string(std::min(depth, 5)));
  f.push_back("chain=" + std::to_string(s.open_chain));
  std::string b0 = s.shifted < s.n ? sent[s.shifted] : "</s>";
  std::string b1 = s.shifted + 1 < s.n ? sent[s.shifted + 1] : "</s>";
  f.push_back("b0=" + b0);
  f.push_back("b1=" + b1);
  f.push_back("b0b1=" + b0 + "+" + b1);
  if (!s.stack.empty()) f.push_back("s0b0=" + s.stack.back().label + "+" + b0);
  f.push_back("rem=" + std::to_string(std::min(s.n - s.shifted, 5)));
  f.push_back("last=" + (s.last_action ? s.last_action->str() : std::string("<init>")));
  return f;
}

inline FeatureVector conjoin(const std::vector<std::string>& state_feats,
                             const Action& a) {
  FeatureVector v;
  v.reserve(state_feats.size());
  std::string astr = a.str();
  for (const std::string& sf : state_feats)
    v[feature_bucket(sf + "|" + astr)] += 1.0;
  return v;
}

}  // namespace detail

// Feature vectors for every legal action of the state.
inline std::vector<std::pair<Action, FeatureVector>> featurize(
    const ParserState& state, const Sentence& sentence,
    const std::vector<std::string>& labels) {
  if (state.finished) throw UsageError("featurize on finished state");
  auto sf = detail::state_features(state, sentence);
  std::vector<std::pair<Action, FeatureVector>> out;
  for (const Action& a : legal_actions(state, labels))
    out.emplace_back(a, detail::conjoin(sf, a));
  return out;
}

// Distribution over the legal actions of one state; illegal actions are
// simply absent from the support.
struct ActionDistribution {
  std::vector<Action> actions;
  std::vector<double> log_probs;

  int find(const Action& a) const {
    for (size_t i = 0; i < actions.size(); ++i)
      if (actions[i] == a) return static_cast<int>(i);
    return -1;
  }
  double log_prob(const Action& a) const {
    int i = find(a);
    if (i < 0) throw UsageError("action not in distribution support");
    return log_probs[i];
  }
};

namespace detail {

inline ActionDistribution softmax_over(
    const std::vector<std::pair<Action, FeatureVector>>& feats,
    const ScorerParams& params, const Action* margin_target, double margin) {
  ActionDistribution dist;
  dist.actions.reserve(feats.size());
  dist.log_probs.reserve(feats.size());
  double max_z = -1e300;
  for (const auto& [a, fv] : feats) {
    double z = 0;
    for (const auto& [id, v] : fv) z += params.weight(id) * v;
    if (margin_target && !(a == *margin_target)) z += margin;
    dist.actions.push_back(a);
    dist.log_probs.push_back(z);
    max_z = std::max(max_z, z);
  }
  double sum = 0;
  for (double z : dist.log_probs) sum += std::exp(z - max_z);
  double log_z = max_z + std::log(sum);
  for (double& z : dist.log_probs) z -= log_z;
  return dist;
}

}  // namespace detail

inline ActionDistribution score(const ParserState& state, const Sentence& sentence,
                                const ScorerParams& params) {
  return detail::softmax_over(featurize(state, sentence, params.labels), params,
                              nullptr, 0.0);
}

// Softmax margin (cost-augmented softmax): every non-oracle action's score
// gets +margin before normalization.
inline ActionDistribution score_margin(const ParserState& state,
                                       const Sentence& sentence,
                                       const ScorerParams& params,
                                       const Action& oracle_action,
                                       double margin = 1.0) {
  auto feats = featurize(state, sentence, params.labels);
  bool found = false;
  for (const auto& [a, fv] : feats)
    if (a == oracle_action) found = true;
  if (!found) throw UsageError("score_margin: oracle action is illegal here");
  return detail::softmax_over(feats, params, &oracle_action, margin);
}

struct GradOptions {
  bool use_margin = false;
  Action margin_target;  // a* for the margin distribution
  double margin = 1.0;
};

// d/dtheta log p(action | state) = phi(s, a) - E_p[phi(s, .)].
inline FeatureVector grad_log_prob(const ParserState& state, const Sentence& sentence,
                                   const ScorerParams& params, const Action& action,
                                   const GradOptions& opts = {}) {
  auto feats = featurize(state, sentence, params.labels);
  ActionDistribution dist = detail::softmax_over(
      feats, params, opts.use_margin ? &opts.margin_target : nullptr, opts.margin);
  int target = dist.find(action);
  if (target < 0) throw UsageError("grad_log_prob: illegal action");
  FeatureVector g = feats[target].second;
  for (size_t i = 0; i < feats.size(); ++i)
    axpy(-std::exp(dist.log_probs[i]), feats[i].second, g);
  return g;
}

// ---- model persistence -----------------------------------------------------

inline void save_params(const ScorerParams& p, std::ostream& out) {
  out.precision(17);
  out << "tdparser-model v1\n";
  out << "templates " << p.template_version << '\n';
  out << "init_seed " << p.init_seed << '\n';
  out << "init_scale " << p.init_scale << '\n';
  out << "labels";
  for (const auto& l : p.labels) out << ' ' << l;
  out << '\n';
  std::vector<std::pair<std::uint32_t, double>> entries(p.weights.begin(),
                                                        p.weights.end());
  std::sort(entries.begin(), entries.end());
  out << "weights " << entries.size() << '\n';
  for (const auto& [id, w] : entries) out << id << ' ' << w << '\n';
}

inline void save_params(const ScorerParams& p, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write model file: " + path);
  save_params(p, out);
}

inline ScorerParams load_params(std::istream& in) {
  ScorerParams p;
  std::string line, word;
  auto bad = [](const std::string& why) -> std::runtime_error {
    return std::runtime_error("bad model file: " + why);
  };
  if (!std::getline(in, line) || line != "tdparser-model v1")
    throw bad("missing header");
  if (!std::getline(in, line)) throw bad("truncated");
  {
    std::stringstream ss(line);
    ss >> word >> p.template_version;
    if (word != "templates") throw bad("expected templates line");
    if (p.template_version != kFeatureTemplateVersion)
      throw bad("feature template version mismatch: file has " +
                p.template_version + ", this build expects " +
                kFeatureTemplateVersion);
  }
  if (!std::getline(in, line)) throw bad("truncated");
  {
    std::stringstream ss(line);
    ss >> word >> p.init_seed;
    if (word != "init_seed") throw bad("expected init_seed line");
  }
  if (!std::getline(in, line)) throw bad("truncated");
  {
    std::stringstream ss(line);
    ss >> word >> p.init_scale;
    if (word != "init_scale") throw bad("expected init_scale line");
  }
  if (!std::getline(in, line)) throw bad("truncated");
  {
    std::stringstream ss(line);
    ss >> word;
    if (word != "labels") throw bad("expected labels line");
    while (ss >> word) p.labels.push_back(word);
  }
  if (!std::getline(in, line)) throw bad("truncated");
  size_t count = 0;
  {
    std::stringstream ss(line);
    ss >> word >> count;
    if (word != "weights") throw bad("expected weights line");
  }
  for (size_t i = 0; i < count; ++i) {
    std::uint32_t id;
    double w;
    if (!(in >> id >> w)) throw bad("truncated weight table");
    p.weights[id] = w;
  }
  return p;
}

inline ScorerParams load_params(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open model file: " + path);
  return load_params(in);
}

}  // namespace topdown
