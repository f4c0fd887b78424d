#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "topdown/tree.hpp"

namespace topdown {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Synthetic grammar: trees are generated directly by top-down expansion with
// a depth budget, so termination and length bounds hold by construction.
struct GrammarSpec {
  std::vector<std::string> labels;
  std::vector<std::string> vocab;
  int min_length = 1;
  int max_length = 6;
  int max_depth = 4;
  int max_arity = 4;
  double unary_prob = 0.1;
  double leaf_prob = 0.5;  // chance a width-1 slot stays a bare word
  // chance a word is cued by its parent constituent (label + first/last
  // position) instead of drawn uniformly; 0 makes words pure noise
  double lexical_bias = 0.0;
  std::uint64_t seed = 1;

  void validate() const {
    if (labels.empty()) throw ConfigError("grammar spec: no labels");
    if (vocab.empty()) throw ConfigError("grammar spec: empty vocabulary");
    if (min_length < 1 || max_length < min_length)
      throw ConfigError("grammar spec: bad length bounds");
    if (max_depth < 1 || max_arity < 1)
      throw ConfigError("grammar spec: depth and arity must be positive");
    if (unary_prob < 0 || unary_prob >= 1 || leaf_prob < 0 || leaf_prob > 1 ||
        lexical_bias < 0 || lexical_bias > 1)
      throw ConfigError("grammar spec: probabilities out of range");
    // capacity of the root: max_arity^max_depth leaves (saturating)
    double cap = std::pow(static_cast<double>(max_arity), max_depth);
    if (static_cast<double>(min_length) > cap)
      throw ConfigError("grammar spec: max depth " + std::to_string(max_depth) +
                        " too small for min length " + std::to_string(min_length));
  }
};

// Plain-text key=value form; '#' starts a comment.
inline GrammarSpec parse_grammar_spec(std::istream& in) {
  GrammarSpec spec;
  int vocab_size = -1;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    auto eq = line.find('=');
    if (eq == std::string::npos) {
      bool blank = line.find_first_not_of(" \t\r") == std::string::npos;
      if (!blank)
        throw ConfigError("grammar spec line " + std::to_string(lineno) +
                          ": expected key=value");
      continue;
    }
    auto trim = [](std::string s) {
      auto b = s.find_first_not_of(" \t\r");
      auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    std::string key = trim(line.substr(0, eq));
    std::string val = trim(line.substr(eq + 1));
    auto split_list = [&](const std::string& v) {
      std::vector<std::string> out;
      std::stringstream ss(v);
      std::string item;
      while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
      }
      return out;
    };
    try {
      if (key == "labels")
        spec.labels = split_list(val);
      else if (key == "vocab")
        spec.vocab = split_list(val);
      else if (key == "vocab_size")
        vocab_size = std::stoi(val);
      else if (key == "min_length")
        spec.min_length = std::stoi(val);
      else if (key == "max_length")
        spec.max_length = std::stoi(val);
      else if (key == "max_depth")
        spec.max_depth = std::stoi(val);
      else if (key == "max_arity")
        spec.max_arity = std::stoi(val);
      else if (key == "unary_prob")
        spec.unary_prob = std::stod(val);
      else if (key == "leaf_prob")
        spec.leaf_prob = std::stod(val);
      else if (key == "lexical_bias")
        spec.lexical_bias = std::stod(val);
      else if (key == "seed")
        spec.seed = std::stoull(val);
      else
        throw ConfigError("grammar spec: unknown key '" + key + "'");
    } catch (const std::invalid_argument&) {
      throw ConfigError("grammar spec line " + std::to_string(lineno) +
                        ": bad value for " + key);
    }
  }
  if (spec.vocab.empty() && vocab_size > 0)
    for (int i = 0; i < vocab_size; ++i)
      spec.vocab.push_back("w" + std::to_string(i));
  spec.validate();
  return spec;
}

inline GrammarSpec load_grammar_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open grammar spec: " + path);
  return parse_grammar_spec(in);
}

namespace detail {

// Deterministic uniform draws from the corpus generator's own stream.
struct GenRng {
  std::mt19937_64 eng;
  double uniform() { return (eng() >> 11) * 0x1.0p-53; }
  int uniform_int(int lo, int hi) {  // inclusive
    return lo + static_cast<int>(eng() % static_cast<std::uint64_t>(hi - lo + 1));
  }
};

inline double capacity(const GrammarSpec& spec, int depth) {
  // leaves reachable below a node at this depth
  return std::pow(static_cast<double>(spec.max_arity),
                  spec.max_depth - depth + 1);
}

inline Tree generate_node(const GrammarSpec& spec, GenRng& rng, int lo, int hi,
                          int depth, std::vector<int>& cues) {
  Tree node;
  int label_idx = rng.uniform_int(0, (int)spec.labels.size() - 1);
  node.label = spec.labels[label_idx];
  node.start = lo;
  node.end = hi;
  int len = hi - lo;
  // cue for a leaf directly under this node: parent label plus whether the
  // leaf opens/closes the parent span
  auto make_leaf = [&](int pos) {
    cues[pos] = label_idx * 4 + (pos == lo ? 2 : 0) + (pos == hi - 1 ? 1 : 0);
    return Tree::leaf(pos);
  };
  if (depth >= spec.max_depth) {
    for (int i = lo; i < hi; ++i) node.children.push_back(make_leaf(i));
    return node;
  }
  if (rng.uniform() < spec.unary_prob &&
      static_cast<double>(len) <= capacity(spec, depth + 1)) {
    node.children.push_back(generate_node(spec, rng, lo, hi, depth + 1, cues));
    return node;
  }
  if (len == 1) {
    node.children.push_back(make_leaf(lo));
    return node;
  }
  double child_cap = capacity(spec, depth + 1);
  int min_parts = std::max(2, static_cast<int>(std::ceil(len / child_cap)));
  int max_parts = std::min(spec.max_arity, len);
  int parts = rng.uniform_int(min_parts, max_parts);
  // random contiguous partition into `parts` nonempty spans, each within
  // the child capacity
  std::vector<int> sizes(parts, 1);
  int extra = len - parts;
  while (extra > 0) {
    int i = rng.uniform_int(0, parts - 1);
    if (sizes[i] + 1 <= child_cap) {
      ++sizes[i];
      --extra;
    }
  }
  int at = lo;
  for (int i = 0; i < parts; ++i) {
    int b = at + sizes[i];
    if (sizes[i] == 1 && rng.uniform() < spec.leaf_prob)
      node.children.push_back(make_leaf(at));
    else
      node.children.push_back(generate_node(spec, rng, at, b, depth + 1, cues));
    at = b;
  }
  return node;
}

}  // namespace detail

using Corpus = std::vector<std::pair<Sentence, Tree>>;

// Deterministic given (spec, spec.seed).
inline Corpus generate_corpus(const GrammarSpec& spec, int count) {
  spec.validate();
  if (count < 1) throw ConfigError("generate_corpus: count must be >= 1");
  detail::GenRng rng{std::mt19937_64(spec.seed)};
  Corpus out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) {
    int n = rng.uniform_int(spec.min_length, spec.max_length);
    std::vector<int> cues(n, 0);
    Tree t = detail::generate_node(spec, rng, 0, n, 1, cues);
    Sentence sent;
    sent.reserve(n);
    for (int w = 0; w < n; ++w) {
      bool cued = spec.lexical_bias > 0 && rng.uniform() < spec.lexical_bias;
      int draw = rng.uniform_int(0, (int)spec.vocab.size() - 1);
      sent.push_back(spec.vocab[cued ? cues[w] % (int)spec.vocab.size() : draw]);
    }
    out.emplace_back(std::move(sent), std::move(t));
  }
  return out;
}

inline Corpus load_corpus(const std::string& path, bool strip_preterminals = false) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open corpus file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return read_bracketed(ss.str(), strip_preterminals);
}

inline void save_corpus(const Corpus& corpus, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write corpus file: " + path);
  for (const auto& [sent, tree] : corpus) out << write_bracketed(tree, sent) << '\n';
}

}  // namespace topdown
