#include "udforest/exporter.hpp"

#include <sstream>

#include "udforest/errors.hpp"

namespace udforest {

namespace {

const std::string& origin_color(const DotStyle& style, Origin origin) {
  switch (origin) {
    case Origin::Root:
      return style.root_color;
    case Origin::Merged:
      return style.merged_color;
    case Origin::SrcCopy:
      return style.src_copy_color;
    case Origin::TgtCopy:
      return style.tgt_copy_color;
  }
  throw ValidationError("unknown node origin");
}

// DOT double-quoted strings escape backslash and quote.
std::string dot_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  return out;
}

}  // namespace

ForestGraph to_graph(const CodeMixedForest& forest,
                     const std::function<Eigen::VectorXd(std::string_view)>& embed,
                     int dim) {
  validate_forest(forest);
  if (dim <= 0) {
    throw ValidationError("graph embedding dim must be positive");
  }
  const int n = static_cast<int>(forest.nodes.size());
  ForestGraph g;
  g.sent_id = forest.sent_id;
  g.node_count = n;
  g.adjacency = Eigen::MatrixXi::Identity(n, n);
  for (const auto& node : forest.nodes) {
    if (node.parent < 0) continue;
    g.adjacency(node.parent, node.id) = 1;
    g.adjacency(node.id, node.parent) = 1;
  }
  g.embeddings.resize(n, dim);
  for (const auto& node : forest.nodes) {
    const Eigen::VectorXd row = embed(node.form);
    if (row.size() != dim) {
      throw ValidationError("embedding for \"" + node.form +
                            "\" has wrong dimension");
    }
    g.embeddings.row(node.id) = row;
  }
  return g;
}

std::string to_dot(const CodeMixedForest& forest, const DotStyle& style) {
  validate_forest(forest);
  std::ostringstream out;
  out << "digraph \"" << dot_escape(forest.sent_id) << "\" {\n";
  out << "  rankdir=TB;\n";
  out << "  node [shape=box, style=filled];\n";
  for (const auto& node : forest.nodes) {
    std::string label = node.origin == Origin::Root
                            ? std::string("ROOT")
                            : node.form + " (" + node.deprel + ")";
    out << "  n" << node.id << " [label=\"" << dot_escape(label)
        << "\", fillcolor=\"" << origin_color(style, node.origin) << "\"];\n";
  }
  for (const auto& node : forest.nodes) {
    if (node.parent < 0) continue;
    out << "  n" << node.parent << " -> n" << node.id;
    if (style.edge_labels) {
      out << " [label=\"" << dot_escape(node.deprel) << "\"]";
    }
    out << ";\n";
  }
  out << "}\n";
  return out.str();
}

nlohmann::ordered_json graph_record_to_json(const CodeMixedForest& forest) {
  validate_forest(forest);
  nlohmann::ordered_json rec;
  rec["sent_id"] = forest.sent_id;
  rec["n"] = forest.nodes.size();
  auto edges = nlohmann::ordered_json::array();
  for (const auto& node : forest.nodes) {
    if (node.parent < 0) continue;
    edges.push_back({node.parent, node.id});
  }
  rec["edges"] = std::move(edges);
  auto forms = nlohmann::ordered_json::array();
  for (const auto& node : forest.nodes) {
    forms.push_back(node.form);
  }
  rec["forms"] = std::move(forms);
  return rec;
}

}  // namespace udforest
