#pragma once

#include <string>
#include <vector>

#include "udforest/errors.hpp"

namespace udforest {

// One word of a dependency tree. Only the columns the toolkit consumes are
// kept: ID, FORM, UPOS, HEAD, DEPREL.
struct Token {
  int index = 0;  // 1-based sentence position
  std::string form;
  std::string upos;
  int head = 0;  // index of the governing token, 0 = ROOT
  std::string deprel;

  bool operator==(const Token&) const = default;
};

// A single-rooted dependency tree over tokens 1..n.
struct UDTree {
  std::string sent_id;
  std::vector<Token> tokens;
  std::string language_tag;  // "src" or "tgt", assigned by the caller
};

// Throws ValidationError (naming sent_id) unless the tree has contiguous
// indices 1..n, exactly one root, and every token reachable from ROOT.
void validate_tree(const UDTree& tree);

// Parses CoNLL-U text into validated trees. Multiword ranges ("3-4") and
// empty nodes ("3.1") are dropped. sent_id comes from the "# sent_id ="
// comment when present, otherwise the 1-based sentence ordinal.
std::vector<UDTree> parse_conllu(const std::string& text);

// Emits one CoNLL-U block: sent_id comment, one line per token, blank line.
// Unretained columns are written as "_".
std::string serialize_conllu(const UDTree& tree);

// Tokens whose head is `index` (0 = ROOT), in ascending index order.
// Throws ValidationError if index is outside 0..n.
std::vector<Token> children(const UDTree& tree, int index);

// "nsubj:pass" -> "nsubj"
std::string coarse_label(const std::string& deprel);

}  // namespace udforest
