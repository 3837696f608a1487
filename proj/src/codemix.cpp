#include "udforest/codemix.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <set>

namespace udforest {

std::string origin_name(Origin origin) {
  switch (origin) {
    case Origin::Root: return "ROOT";
    case Origin::Merged: return "MERGED";
    case Origin::SrcCopy: return "SRC_COPY";
    case Origin::TgtCopy: return "TGT_COPY";
  }
  throw ValidationError("unknown origin value");
}

Origin origin_from_name(const std::string& name) {
  if (name == "ROOT") return Origin::Root;
  if (name == "MERGED") return Origin::Merged;
  if (name == "SRC_COPY") return Origin::SrcCopy;
  if (name == "TGT_COPY") return Origin::TgtCopy;
  throw ValidationError("unknown origin '" + name + "'");
}

std::string rel_side_name(RelSide side) {
  switch (side) {
    case RelSide::Src: return "SRC";
    case RelSide::Tgt: return "TGT";
    case RelSide::Forest: return "FOREST";
  }
  throw ValidationError("unknown relation side value");
}

RelSide rel_side_from_name(const std::string& name) {
  if (name == "SRC") return RelSide::Src;
  if (name == "TGT") return RelSide::Tgt;
  if (name == "FOREST") return RelSide::Forest;
  throw ValidationError("unknown relation side '" + name + "'");
}

void validate_forest(const CodeMixedForest& forest) {
  const std::string where = "forest '" + forest.sent_id + "': ";
  if (forest.nodes.empty()) throw ValidationError(where + "no ROOT node");

  std::set<int> seen_src, seen_tgt;
  int merged = 0;
  for (std::size_t i = 0; i < forest.nodes.size(); ++i) {
    const ForestNode& node = forest.nodes[i];
    const std::string at = where + "node " + std::to_string(node.id) + ": ";
    if (node.id != static_cast<int>(i))
      throw ValidationError(where + "node ids not contiguous at position " +
                            std::to_string(i));
    if (i == 0) {
      if (node.origin != Origin::Root || node.parent != -1 ||
          node.src_index || node.tgt_index)
        throw ValidationError(where + "node 0 is not a plain ROOT");
      continue;
    }
    if (node.origin == Origin::Root)
      throw ValidationError(at + "extra ROOT node");
    if (node.parent < 0 || node.parent >= node.id)
      throw ValidationError(at + "parent " + std::to_string(node.parent) +
                            " does not precede the node");
    if (node.deprel.empty()) throw ValidationError(at + "empty deprel");

    bool want_src = node.origin != Origin::TgtCopy;
    bool want_tgt = node.origin != Origin::SrcCopy;
    if (want_src != node.src_index.has_value() ||
        want_tgt != node.tgt_index.has_value())
      throw ValidationError(at + "token indices inconsistent with origin " +
                            origin_name(node.origin));
    if (node.src_index) {
      if (*node.src_index < 1 || *node.src_index > forest.src_len)
        throw ValidationError(at + "src_index out of range");
      if (!seen_src.insert(*node.src_index).second)
        throw ValidationError(at + "src_index housed twice");
    }
    if (node.tgt_index) {
      if (*node.tgt_index < 1 || *node.tgt_index > forest.tgt_len)
        throw ValidationError(at + "tgt_index out of range");
      if (!seen_tgt.insert(*node.tgt_index).second)
        throw ValidationError(at + "tgt_index housed twice");
    }
    if (node.origin == Origin::Merged) ++merged;
  }
  if (merged != forest.merged_count)
    throw ValidationError(where + "merged_count " +
                          std::to_string(forest.merged_count) +
                          " != counted " + std::to_string(merged));
  int content = static_cast<int>(forest.nodes.size()) - 1;
  if (content != forest.src_len + forest.tgt_len - forest.merged_count)
    throw ValidationError(where + "node conservation violated: " +
                          std::to_string(content) + " content nodes vs " +
                          std::to_string(forest.src_len) + "+" +
                          std::to_string(forest.tgt_len) + "-" +
                          std::to_string(forest.merged_count));
}

namespace {

// Appends one copied subtree, level by level, children in ascending index
// order. Copied subtrees arrive verbatim with their original labels.
void copy_subtree(const UDTree& tree, const Token& top, int parent_id,
                  Origin origin, CodeMixedForest& forest) {
  std::deque<std::pair<Token, int>> queue = {{top, parent_id}};
  while (!queue.empty()) {
    auto [token, parent] = queue.front();
    queue.pop_front();
    ForestNode node;
    node.id = static_cast<int>(forest.nodes.size());
    node.form = token.form;
    node.origin = origin;
    if (origin == Origin::SrcCopy)
      node.src_index = token.index;
    else
      node.tgt_index = token.index;
    node.deprel = token.deprel;
    node.parent = parent;
    forest.nodes.push_back(node);
    for (const Token& child : children(tree, token.index))
      queue.emplace_back(child, node.id);
  }
}

}  // namespace

CodeMixedForest construct_forest(const UDTree& src, const UDTree& tgt,
                                 const AlignmentMatrix& m, double theta) {
  const int src_len = static_cast<int>(src.tokens.size());
  const int tgt_len = static_cast<int>(tgt.tokens.size());
  for (const auto& [key, score] : m.entries) {
    if (key.first < 1 || key.first > src_len || key.second < 1 ||
        key.second > tgt_len)
      throw ValidationError("sentence '" + src.sent_id + "': alignment entry (" +
                            std::to_string(key.first) + "," +
                            std::to_string(key.second) +
                            ") outside the sentence pair");
  }

  CodeMixedForest forest;
  forest.sent_id = src.sent_id;
  forest.src_len = src_len;
  forest.tgt_len = tgt_len;
  ForestNode root;
  root.form = "ROOT";
  forest.nodes.push_back(std::move(root));  // id 0

  struct Pending {
    int forest_id;
    std::vector<Token> src_children;
    std::vector<Token> tgt_children;
  };
  // The root predicates are the first layer; ids then follow visit order.
  std::deque<Pending> queue;
  queue.push_back({0, children(src, 0), children(tgt, 0)});

  while (!queue.empty()) {
    Pending cur = std::move(queue.front());
    queue.pop_front();

    AlignSearchResult layer =
        align_search(cur.src_children, cur.tgt_children, m, theta);

    std::sort(layer.aligned.begin(), layer.aligned.end(),
              [](const AlignedPair& a, const AlignedPair& b) {
                return a.src_index < b.src_index;
              });
    for (const AlignedPair& pair : layer.aligned) {
      ForestNode node;
      node.id = static_cast<int>(forest.nodes.size());
      node.form = tgt.tokens[pair.tgt_index - 1].form;
      node.origin = Origin::Merged;
      node.src_index = pair.src_index;
      node.tgt_index = pair.tgt_index;
      node.deprel = pair.arc;
      node.parent = cur.forest_id;
      forest.nodes.push_back(node);
      ++forest.merged_count;
      queue.push_back({node.id, children(src, pair.src_index),
                       children(tgt, pair.tgt_index)});
    }
    for (const UnalignedNode& un : layer.nonaligned) {
      if (un.side == Side::Src)
        copy_subtree(src, un.token, cur.forest_id, Origin::SrcCopy, forest);
    }
    for (const UnalignedNode& un : layer.nonaligned) {
      if (un.side == Side::Tgt)
        copy_subtree(tgt, un.token, cur.forest_id, Origin::TgtCopy, forest);
    }
  }

  validate_forest(forest);
  return forest;
}

std::vector<TextToken> assemble_codemixed_text(const UDTree& src,
                                               const CodeMixedForest& forest) {
  std::map<int, const ForestNode*> by_src;
  for (const ForestNode& node : forest.nodes)
    if (node.src_index) by_src[*node.src_index] = &node;

  std::vector<TextToken> text;
  for (const Token& token : src.tokens) {
    auto it = by_src.find(token.index);
    if (it == by_src.end())
      throw ValidationError("forest '" + forest.sent_id +
                            "' does not house source token " +
                            std::to_string(token.index));
    const ForestNode& node = *it->second;
    text.push_back({node.form, node.origin, token.index, node.tgt_index});
  }
  return text;
}

ProjectionResult project_relation(const RelationInstance& rel,
                                  const AlignmentMatrix& m, double theta) {
  if (rel.side != RelSide::Src)
    throw ValidationError("projection expects a SRC-side relation");

  auto image = [&](const Span& span) -> std::optional<Span> {
    int lo = 0, hi = 0;
    bool any = false;
    for (const auto& [key, score] : m.entries) {
      if (score <= theta) continue;
      if (key.first < span.begin || key.first > span.end) continue;
      if (!any) {
        lo = hi = key.second;
        any = true;
      } else {
        lo = std::min(lo, key.second);
        hi = std::max(hi, key.second);
      }
    }
    if (!any) return std::nullopt;
    return Span{lo, hi};
  };

  ProjectionResult result;
  std::optional<Span> subj = image(rel.subj);
  if (!subj) {
    result.failed_span = SpanKind::Subj;
    return result;
  }
  std::optional<Span> obj = image(rel.obj);
  if (!obj) {
    result.failed_span = SpanKind::Obj;
    return result;
  }
  result.ok = true;
  result.projected = {rel.sent_id, *subj, *obj, rel.label, RelSide::Tgt};
  return result;
}

std::vector<int> span_to_forest_nodes(const Span& span, Side side,
                                      const CodeMixedForest& forest) {
  std::map<int, int> housing;
  for (const ForestNode& node : forest.nodes) {
    const std::optional<int>& idx =
        side == Side::Src ? node.src_index : node.tgt_index;
    if (idx) housing[*idx] = node.id;
  }
  std::vector<int> ids;
  for (int i = span.begin; i <= span.end; ++i) {
    auto it = housing.find(i);
    if (it == housing.end())
      throw ValidationError("forest '" + forest.sent_id + "' does not house " +
                            std::string(side == Side::Src ? "source" : "target") +
                            " token " + std::to_string(i));
    ids.push_back(it->second);
  }
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return ids;
}

ForestRelation merge_annotations(const RelationInstance& src_rel,
                                 const RelationInstance& tgt_rel,
                                 const CodeMixedForest& forest) {
  auto merged = [&](const Span& s, const Span& t) {
    std::vector<int> ids = span_to_forest_nodes(s, Side::Src, forest);
    std::vector<int> tgt_ids = span_to_forest_nodes(t, Side::Tgt, forest);
    ids.insert(ids.end(), tgt_ids.begin(), tgt_ids.end());
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    return ids;
  };
  ForestRelation rel;
  rel.subj_nodes = merged(src_rel.subj, tgt_rel.subj);
  rel.obj_nodes = merged(src_rel.obj, tgt_rel.obj);
  rel.label = src_rel.label;
  return rel;
}

}  // namespace udforest
