#pragma once

#include <optional>
#include <string>
#include <vector>

#include "udforest/alignment.hpp"
#include "udforest/treebank.hpp"

namespace udforest {

enum class Origin { Root, Merged, SrcCopy, TgtCopy };

std::string origin_name(Origin origin);
Origin origin_from_name(const std::string& name);

struct ForestNode {
  int id = 0;  // contiguous, creation order; 0 is ROOT
  std::string form;
  Origin origin = Origin::Root;
  std::optional<int> src_index;  // 1-based source token housed here
  std::optional<int> tgt_index;  // 1-based target token housed here
  std::string deprel;            // arc label to the parent; empty on ROOT
  int parent = -1;               // -1 on ROOT only
};

// The merged structure over one sentence pair. nodes[0] is the synthetic
// ROOT; every aligned pair collapses into one MERGED node carrying the
// target form and label, everything else is copied verbatim.
struct CodeMixedForest {
  std::string sent_id;
  std::vector<ForestNode> nodes;
  int src_len = 0;
  int tgt_len = 0;
  int merged_count = 0;
};

void validate_forest(const CodeMixedForest& forest);

// Breadth-first top-down merge of the two trees. The two root predicates
// form the first layer under the synthetic ROOT and are matched like any
// other layer, so at theta = 1 the forest degenerates to the disjoint
// union of both trees. Node ids follow visit order: for each processed
// node, merged children first (ascending source index), then copied source
// subtrees, then copied target subtrees, each subtree materialized level by
// level. Node count - 1 always equals src_len + tgt_len - merged_count.
CodeMixedForest construct_forest(const UDTree& src, const UDTree& tgt,
                                 const AlignmentMatrix& m, double theta);

struct TextToken {
  std::string form;
  Origin origin = Origin::SrcCopy;  // Merged or SrcCopy
  int src_index = 0;
  std::optional<int> tgt_index;
};

// The code-mixed sentence in source token order: tokens housed in MERGED
// nodes surface with the target form, the rest keep the source form.
// Unaligned target tokens live only in the forest, never in the text.
std::vector<TextToken> assemble_codemixed_text(const UDTree& src,
                                               const CodeMixedForest& forest);

enum class RelSide { Src, Tgt, Forest };

std::string rel_side_name(RelSide side);
RelSide rel_side_from_name(const std::string& name);

struct Span {
  int begin = 0;  // inclusive, 1-based
  int end = 0;    // inclusive

  bool operator==(const Span&) const = default;
};

struct RelationInstance {
  std::string sent_id;
  Span subj;
  Span obj;
  std::string label;
  RelSide side = RelSide::Src;
};

enum class SpanKind { Subj, Obj };

struct ProjectionResult {
  bool ok = false;
  RelationInstance projected;              // set when ok
  SpanKind failed_span = SpanKind::Subj;   // set when !ok
};

// Maps each span to the target indices aligned above theta to any token of
// the span and takes their [min, max] hull. Fails (naming the span) when a
// span has an empty image.
ProjectionResult project_relation(const RelationInstance& rel,
                                  const AlignmentMatrix& m, double theta);

// A relation re-expressed over forest node ids (sorted, deduplicated).
struct ForestRelation {
  std::vector<int> subj_nodes;
  std::vector<int> obj_nodes;
  std::string label;
};

// Forest node ids housing the tokens of `span` on the given side.
// Throws ValidationError if a token is housed nowhere.
std::vector<int> span_to_forest_nodes(const Span& span, Side side,
                                      const CodeMixedForest& forest);

// Combines the source and target views of one relation into node-id sets:
// tokens absorbed into MERGED nodes resolve to that node, copies to their
// copy node.
ForestRelation merge_annotations(const RelationInstance& src_rel,
                                 const RelationInstance& tgt_rel,
                                 const CodeMixedForest& forest);

}  // namespace udforest
