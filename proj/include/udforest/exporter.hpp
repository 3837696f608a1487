#pragma once

#include <functional>
#include <string>

#include <nlohmann/json.hpp>

#include "udforest/codemix.hpp"
#include "udforest/encoder.hpp"

namespace udforest {

// Node fill colours and edge labelling for DOT output.
struct DotStyle {
  std::string root_color = "#f2f2f2";
  std::string merged_color = "#b7e4c7";
  std::string src_copy_color = "#a8dadc";
  std::string tgt_copy_color = "#ffd6a5";
  bool edge_labels = true;
};

// Builds the numeric graph for a forest: one graph node per forest node
// (ids map straight to row indices, ROOT included so the graph stays
// connected even when nothing merged), parent arcs symmetrized, self-loops
// on the diagonal. `embed` supplies one row per surface form; the ROOT row
// embeds the literal form "ROOT".
ForestGraph to_graph(const CodeMixedForest& forest,
                     const std::function<Eigen::VectorXd(std::string_view)>& embed,
                     int dim);

// GraphViz rendering: one digraph per forest, parent -> child arcs,
// nodes labelled "form (deprel)" and coloured by origin.
std::string to_dot(const CodeMixedForest& forest, const DotStyle& style = {});

// Compact JSON line for a graph: {"sent_id","n","edges","forms"} with edges
// as [parent, child] pairs in child-id order.
nlohmann::ordered_json graph_record_to_json(const CodeMixedForest& forest);

}  // namespace udforest
