#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "udforest/errors.hpp"

namespace udforest {

// Numeric view of a forest: undirected 0/1 adjacency with self-loops plus
// one embedding row per node.
struct ForestGraph {
  std::string sent_id;
  int node_count = 0;
  Eigen::MatrixXi adjacency;   // symmetric, unit diagonal
  Eigen::MatrixXd embeddings;  // node_count x dim
};

struct GatLayerParams {
  Eigen::MatrixXd w_self;   // transforms the attending node, dim x dim
  Eigen::MatrixXd w_neigh;  // transforms the neighbour, dim x dim
  Eigen::MatrixXd w_value;  // aggregation transform, dim x dim
  Eigen::VectorXd attn;     // attention vector, 2*dim
};

struct EncoderParams {
  int dim = 0;
  int label_count = 0;
  std::vector<GatLayerParams> layers;
  std::vector<Eigen::MatrixXd> rel_bilinear;  // label_count matrices, dim x dim
  Eigen::MatrixXd rel_linear;                 // label_count x 2*dim
  std::uint64_t seed = 0;

  // Uniform in [-1/sqrt(dim), 1/sqrt(dim)], drawn in a fixed field order
  // from a seeded generator, so equal seeds give bit-equal parameters.
  static EncoderParams random(int dim, int label_count, int layer_count,
                              std::uint64_t seed);
  static EncoderParams zeros(int dim, int label_count, int layer_count);
};

// Attention weights: rho(i,j) = softmax over j in N(i) of
// gelu(attn . [w_self r_i ; w_neigh r_j]); zero outside N(i), so every row
// sums to 1 over the node's neighbour set.
Eigen::MatrixXd gat_attention(const ForestGraph& graph,
                              const Eigen::MatrixXd& input,
                              const GatLayerParams& params);

// One layer: u_i = sigmoid(sum_j rho(i,j) w_value r_j).
Eigen::MatrixXd gat_layer(const ForestGraph& graph, const Eigen::MatrixXd& input,
                          const GatLayerParams& params);

// Stacks all layers on the graph embeddings and concatenates the original
// embeddings with the last layer's output: node_count x 2*dim.
Eigen::MatrixXd encode(const ForestGraph& graph, const EncoderParams& params);

// Label distribution for a node pair: softmax over
// h_s^T rel_bilinear[l] h_o + rel_linear[l] . mean-pooled encoding, where
// h_s, h_o are the embedding halves of the encoded rows.
Eigen::VectorXd biaffine_score(const Eigen::MatrixXd& encoded, int subj_node,
                               int obj_node, const EncoderParams& params);

// Deterministic stand-in for a learned embedding table: hashes the surface
// form into a seeded generator and draws `dim` values in [-1, 1].
struct HashEmbedder {
  int dim = 0;
  std::uint64_t seed = 0;

  Eigen::VectorXd operator()(std::string_view form) const;
};

}  // namespace udforest
