#pragma once

#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "udforest/alignment.hpp"
#include "udforest/codemix.hpp"
#include "udforest/treebank.hpp"

namespace udforest {

// Pooled corpus rates; a rate is absent when its denominator is zero.
struct BiasReport {
  std::optional<double> misaligned_word_rate;
  std::optional<double> mismatched_edge_rate;
  std::optional<double> mismatched_path_rate;
  long sentence_count = 0;
};

struct DistanceReport {
  double mean_sequential_distance = 0.0;
  double mean_syntactic_distance = 0.0;
  long instance_count = 0;
};

struct MergeStats {
  int src_len = 0;
  int tgt_len = 0;
  int merged_count = 0;
};

struct MergeReport {
  double mean_src_len = 0.0;
  double mean_tgt_len = 0.0;
  double mean_sum = 0.0;
  double mean_forest_len = 0.0;  // always mean_sum - mean_merged
  double mean_merged = 0.0;
  double merge_rate = 0.0;  // total merged / total (src + tgt)
  long sentence_count = 0;
};

// Tokens of either sentence with no alignment entry above theta touching
// them, over src_len + tgt_len. Counts variant returns (misaligned, total).
std::pair<long, long> misaligned_word_counts(const UDTree& src,
                                             const UDTree& tgt,
                                             const AlignmentMatrix& m,
                                             double theta);
double misaligned_word_rate(const UDTree& src, const UDTree& tgt,
                            const AlignmentMatrix& m, double theta);

// Source head->dependent edges (token-token only) whose endpoints both land
// in the greedy whole-sentence one-to-one alignment and whose image edge
// exists in the target tree with the same direction; with coarse_labels the
// dependent labels must also agree up to ':'. Returns 1 - matched/edges
// (0 when the source tree has no token-token edge).
std::pair<long, long> mismatched_edge_counts(const UDTree& src,
                                             const UDTree& tgt,
                                             const AlignmentMatrix& m,
                                             double theta, bool coarse_labels);
double mismatched_edge_rate(const UDTree& src, const UDTree& tgt,
                            const AlignmentMatrix& m, double theta,
                            bool coarse_labels);

// True when the subject/object span heads cannot both be aligned, or the
// label sequences (coarse) of the shortest undirected paths differ between
// the two trees.
bool relation_path_mismatch(const UDTree& src, const UDTree& tgt,
                            const AlignmentMatrix& m, double theta,
                            const RelationInstance& rel);

struct Distances {
  int sequential = 0;  // |subj head position - obj head position|
  int syntactic = 0;   // edges on the shortest undirected path
};

// A span's head token is its first token whose parent lies outside the span.
Distances subject_object_distances(const UDTree& tree,
                                   const RelationInstance& rel);
int span_head_index(const UDTree& tree, const Span& span);

// Greedy one-to-one alignment over whole sentences, src index -> tgt index.
std::map<int, int> whole_sentence_alignment(const UDTree& src,
                                            const UDTree& tgt,
                                            const AlignmentMatrix& m,
                                            double theta);

MergeStats merge_stats(const CodeMixedForest& forest);
MergeReport merge_report(const std::vector<MergeStats>& stats);  // throws on empty

// Streaming accumulator for the pooled bias rates; associative, so shards
// can be combined in any grouping.
struct BiasAccumulator {
  long misaligned_tokens = 0;
  long total_tokens = 0;
  long mismatched_edges = 0;
  long total_edges = 0;
  long mismatched_paths = 0;
  long total_paths = 0;
  long sentences = 0;

  void add_sentence(const UDTree& src, const UDTree& tgt,
                    const AlignmentMatrix& m, double theta, bool coarse_labels);
  void add_relation(const UDTree& src, const UDTree& tgt,
                    const AlignmentMatrix& m, double theta,
                    const RelationInstance& rel);
  void combine(const BiasAccumulator& other);
  BiasReport report() const;
};

struct DistanceAccumulator {
  long sequential_total = 0;
  long syntactic_total = 0;
  long instances = 0;

  void add(const UDTree& tree, const RelationInstance& rel);
  void combine(const DistanceAccumulator& other);
  DistanceReport report() const;
};

}  // namespace udforest
