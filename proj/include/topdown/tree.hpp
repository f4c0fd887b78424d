#pragma once

#include <cstddef>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace topdown {

using Sentence = std::vector<std::string>;

// Error raised by the bracketed-format reader; carries line/column.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& msg, int line, int col)
      : std::runtime_error(msg + " at line " + std::to_string(line) +
                           ", column " + std::to_string(col)),
        line_(line),
        col_(col) {}
  int line() const { return line_; }
  int column() const { return col_; }

 private:
  int line_, col_;
};

class UsageError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// N-ary labeled constituency tree over an indexed sentence. A node with an
// empty label is a leaf standing for word index `start` (end = start + 1).
// Leaves of a valid tree, read left to right, are exactly 0..n-1.
struct Tree {
  std::string label;
  int start = 0;
  int end = 0;
  std::vector<Tree> children;

  bool is_leaf() const { return label.empty(); }
  int leaf_index() const { return start; }

  static Tree leaf(int index) {
    Tree t;
    t.start = index;
    t.end = index + 1;
    return t;
  }

  bool operator==(const Tree&) const = default;
};

struct Bracket {
  std::string label;
  int start = 0;
  int end = 0;

  auto operator<=>(const Bracket&) const = default;
};

// Multiset of labeled brackets; counts are always >= 1.
using BracketMultiset = std::map<Bracket, int>;

inline int total_count(const BracketMultiset& m) {
  int n = 0;
  for (const auto& [b, c] : m) n += c;
  return n;
}

inline int multiset_intersection_size(const BracketMultiset& a,
                                      const BracketMultiset& b) {
  int n = 0;
  for (const auto& [bracket, count] : a) {
    auto it = b.find(bracket);
    if (it != b.end()) n += std::min(count, it->second);
  }
  return n;
}

namespace detail {

inline void collect_brackets(const Tree& t, BracketMultiset& out,
                             bool is_root, bool include_root) {
  if (t.is_leaf()) return;
  if (!is_root || include_root) out[Bracket{t.label, t.start, t.end}]++;
  for (const Tree& c : t.children)
    collect_brackets(c, out, false, include_root);
}

inline int count_internal(const Tree& t) {
  if (t.is_leaf()) return 0;
  int n = 1;
  for (const Tree& c : t.children) n += count_internal(c);
  return n;
}

inline void check_leaves(const Tree& t, int& next) {
  if (t.is_leaf()) {
    if (t.leaf_index() != next)
      throw UsageError("tree leaves are not 0..n-1 in order");
    ++next;
    return;
  }
  if (t.children.empty()) throw UsageError("internal node with no children");
  for (const Tree& c : t.children) check_leaves(c, next);
}

}  // namespace detail

// One entry per internal node, unary chains included as duplicates.
inline BracketMultiset brackets(const Tree& t, bool include_root = true) {
  BracketMultiset out;
  detail::collect_brackets(t, out, true, include_root);
  return out;
}

inline int internal_node_count(const Tree& t) {
  return detail::count_internal(t);
}

// Throws UsageError if the tree violates the leaf-order or span invariants.
inline void validate_tree(const Tree& t, int sentence_length) {
  int next = 0;
  detail::check_leaves(t, next);
  if (next != sentence_length)
    throw UsageError("tree covers " + std::to_string(next) + " words, sentence has " +
                     std::to_string(sentence_length));
  if (t.start != 0 || t.end != sentence_length)
    throw UsageError("root span does not cover the sentence");
}

// Treebank escaping for literal parentheses inside tokens.
inline std::string escape_token(std::string_view word) {
  std::string out;
  out.reserve(word.size());
  for (char c : word) {
    if (c == '(')
      out += "-LRB-";
    else if (c == ')')
      out += "-RRB-";
    else
      out += c;
  }
  return out;
}

inline std::string unescape_token(std::string_view tok) {
  std::string out;
  out.reserve(tok.size());
  for (size_t i = 0; i < tok.size();) {
    if (tok.compare(i, 5, "-LRB-") == 0) {
      out += '(';
      i += 5;
    } else if (tok.compare(i, 5, "-RRB-") == 0) {
      out += ')';
      i += 5;
    } else {
      out += tok[i++];
    }
  }
  return out;
}

namespace detail {

struct BracketLexer {
  std::string_view text;
  size_t pos = 0;
  int line = 1, col = 1;

  void advance() {
    if (text[pos] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
    ++pos;
  }
  void skip_space() {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos])))
      advance();
  }
  bool eof() {
    skip_space();
    return pos >= text.size();
  }
  char peek() const { return text[pos]; }
  std::string atom() {
    std::string out;
    while (pos < text.size() && !std::isspace(static_cast<unsigned char>(text[pos])) &&
           text[pos] != '(' && text[pos] != ')') {
      out += text[pos];
      advance();
    }
    return out;
  }
};

inline Tree parse_group(BracketLexer& lx, Sentence& sent, int& next_leaf) {
  // caller positioned at '('
  int open_line = lx.line, open_col = lx.col;
  lx.advance();
  lx.skip_space();
  if (lx.pos >= lx.text.size())
    throw ParseError("unbalanced parentheses", open_line, open_col);
  if (lx.peek() == ')')
    throw ParseError("empty constituent", lx.line, lx.col);
  if (lx.peek() == '(')
    throw ParseError("constituent missing label", lx.line, lx.col);
  Tree node;
  node.label = lx.atom();
  node.start = next_leaf;
  while (true) {
    lx.skip_space();
    if (lx.pos >= lx.text.size())
      throw ParseError("unbalanced parentheses", open_line, open_col);
    if (lx.peek() == ')') {
      lx.advance();
      break;
    }
    if (lx.peek() == '(') {
      node.children.push_back(parse_group(lx, sent, next_leaf));
    } else {
      std::string word = unescape_token(lx.atom());
      sent.push_back(word);
      node.children.push_back(Tree::leaf(next_leaf++));
    }
  }
  if (node.children.empty())
    throw ParseError("empty constituent", open_line, open_col);
  node.end = next_leaf;
  return node;
}

inline void strip_preterminals(Tree& t) {
  // decide on the original structure, so a constituent whose tag child was
  // just stripped does not itself look like a preterminal
  for (Tree& c : t.children) {
    if (c.is_leaf()) continue;
    if (c.children.size() == 1 && c.children[0].is_leaf())
      c = c.children[0];
    else
      strip_preterminals(c);
  }
}

}  // namespace detail

// Reads a sequence of bracketed trees. With strip_preterminals, innermost
// (TAG word) groups below the root collapse to the bare word (for real
// treebank files); by default every parenthesized group is a constituent.
inline std::vector<std::pair<Sentence, Tree>> read_bracketed(
    std::string_view text, bool strip_preterminals = false) {
  std::vector<std::pair<Sentence, Tree>> out;
  detail::BracketLexer lx{text};
  while (!lx.eof()) {
    if (lx.peek() != '(')
      throw ParseError("expected '('", lx.line, lx.col);
    Sentence sent;
    int next_leaf = 0;
    Tree t = detail::parse_group(lx, sent, next_leaf);
    if (strip_preterminals) detail::strip_preterminals(t);
    out.emplace_back(std::move(sent), std::move(t));
  }
  return out;
}

namespace detail {
inline void write_node(const Tree& t, const Sentence& sent, std::string& out) {
  if (t.is_leaf()) {
    out += escape_token(sent.at(t.leaf_index()));
    return;
  }
  out += '(';
  out += t.label;
  for (const Tree& c : t.children) {
    out += ' ';
    write_node(c, sent, out);
  }
  out += ')';
}
}  // namespace detail

inline std::string write_bracketed(const Tree& t, const Sentence& sent) {
  std::string out;
  detail::write_node(t, sent, out);
  return out;
}

}  // namespace topdown
