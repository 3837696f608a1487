#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "udforest/treebank.hpp"

namespace udforest {

enum class Side { Src, Tgt };

// Sparse word-alignment confidences for one sentence pair, 1-based indices.
struct AlignmentMatrix {
  std::string sent_id;
  std::map<std::pair<int, int>, double> entries;  // (src, tgt) -> [0,1]
};

struct AlignedPair {
  int src_index = 0;
  int tgt_index = 0;
  double score = 0.0;
  std::string arc;  // deprel of the TGT-side node
};

struct UnalignedNode {
  Token token;
  Side side = Side::Src;
};

struct AlignSearchResult {
  std::vector<AlignedPair> aligned;
  std::vector<UnalignedNode> nonaligned;  // SRC leftovers first, then TGT
};

// Reads TSV lines "sent_id<TAB>src<TAB>tgt<TAB>score", grouped per sentence.
// Duplicate (src,tgt) keys keep the maximum score.
std::map<std::string, AlignmentMatrix> read_alignments(const std::string& text);

// Greedy one-to-one matching between two same-layer node lists. Candidates
// are the entries of `m` restricted to the given nodes with score strictly
// above `theta`, taken in descending score order (ties: smaller src index,
// then smaller tgt index). Every input node comes back exactly once, either
// aligned or in `nonaligned` (input order preserved per side).
AlignSearchResult align_search(const std::vector<Token>& src_nodes,
                               const std::vector<Token>& tgt_nodes,
                               const AlignmentMatrix& m, double theta);

}  // namespace udforest
