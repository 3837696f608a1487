#include "udforest/encoder.hpp"

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>

namespace udforest {

namespace {

// 53-bit mantissa draw; the shift keeps the mapping stable across platforms.
double uniform_unit(std::mt19937_64& gen) {
  return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

double uniform_in(std::mt19937_64& gen, double lo, double hi) {
  return lo + (hi - lo) * uniform_unit(gen);
}

void fill_uniform(Eigen::MatrixXd& m, std::mt19937_64& gen, double bound) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      m(r, c) = uniform_in(gen, -bound, bound);
    }
  }
}

void fill_uniform(Eigen::VectorXd& v, std::mt19937_64& gen, double bound) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    v(i) = uniform_in(gen, -bound, bound);
  }
}

double gelu(double x) {
  return 0.5 * x * (1.0 + std::erf(x / std::numbers::sqrt2));
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

void check_graph(const ForestGraph& graph, const EncoderParams& params) {
  if (graph.node_count <= 0) {
    throw ValidationError("graph " + graph.sent_id + ": no nodes");
  }
  if (graph.adjacency.rows() != graph.node_count ||
      graph.adjacency.cols() != graph.node_count) {
    throw ValidationError("graph " + graph.sent_id + ": adjacency shape mismatch");
  }
  if (graph.embeddings.rows() != graph.node_count ||
      graph.embeddings.cols() != params.dim) {
    throw ValidationError("graph " + graph.sent_id + ": embedding shape mismatch");
  }
  for (int i = 0; i < graph.node_count; ++i) {
    if (graph.adjacency(i, i) != 1) {
      throw ValidationError("graph " + graph.sent_id + ": missing self-loop");
    }
    for (int j = i + 1; j < graph.node_count; ++j) {
      if (graph.adjacency(i, j) != graph.adjacency(j, i)) {
        throw ValidationError("graph " + graph.sent_id + ": adjacency not symmetric");
      }
    }
  }
}

}  // namespace

EncoderParams EncoderParams::random(int dim, int label_count, int layer_count,
                                    std::uint64_t seed) {
  if (dim <= 0 || label_count <= 0 || layer_count <= 0) {
    throw ValidationError("encoder parameters need positive dim, label count, and layer count");
  }
  EncoderParams p;
  p.dim = dim;
  p.label_count = label_count;
  p.seed = seed;
  const double bound = 1.0 / std::sqrt(static_cast<double>(dim));
  std::mt19937_64 gen(seed);
  p.layers.resize(layer_count);
  for (auto& layer : p.layers) {
    layer.w_self.resize(dim, dim);
    layer.w_neigh.resize(dim, dim);
    layer.w_value.resize(dim, dim);
    layer.attn.resize(2 * dim);
    fill_uniform(layer.w_self, gen, bound);
    fill_uniform(layer.w_neigh, gen, bound);
    fill_uniform(layer.w_value, gen, bound);
    fill_uniform(layer.attn, gen, bound);
  }
  p.rel_bilinear.resize(label_count);
  for (auto& m : p.rel_bilinear) {
    m.resize(dim, dim);
    fill_uniform(m, gen, bound);
  }
  p.rel_linear.resize(label_count, 2 * dim);
  fill_uniform(p.rel_linear, gen, bound);
  return p;
}

EncoderParams EncoderParams::zeros(int dim, int label_count, int layer_count) {
  if (dim <= 0 || label_count <= 0 || layer_count <= 0) {
    throw ValidationError("encoder parameters need positive dim, label count, and layer count");
  }
  EncoderParams p;
  p.dim = dim;
  p.label_count = label_count;
  p.layers.resize(layer_count);
  for (auto& layer : p.layers) {
    layer.w_self = Eigen::MatrixXd::Zero(dim, dim);
    layer.w_neigh = Eigen::MatrixXd::Zero(dim, dim);
    layer.w_value = Eigen::MatrixXd::Zero(dim, dim);
    layer.attn = Eigen::VectorXd::Zero(2 * dim);
  }
  p.rel_bilinear.assign(label_count, Eigen::MatrixXd::Zero(dim, dim));
  p.rel_linear = Eigen::MatrixXd::Zero(label_count, 2 * dim);
  return p;
}

Eigen::MatrixXd gat_attention(const ForestGraph& graph,
                              const Eigen::MatrixXd& input,
                              const GatLayerParams& params) {
  const int n = graph.node_count;
  const Eigen::MatrixXd self_proj = input * params.w_self.transpose();
  const Eigen::MatrixXd neigh_proj = input * params.w_neigh.transpose();
  const Eigen::Index dim = input.cols();
  const auto attn_self = params.attn.head(dim);
  const auto attn_neigh = params.attn.tail(dim);

  Eigen::MatrixXd rho = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    const double self_term = attn_self.dot(self_proj.row(i));
    // Softmax over the neighbour set only; max-shift for stability.
    double max_score = -std::numeric_limits<double>::infinity();
    for (int j = 0; j < n; ++j) {
      if (graph.adjacency(i, j) == 0) continue;
      const double score = gelu(self_term + attn_neigh.dot(neigh_proj.row(j)));
      rho(i, j) = score;
      max_score = std::max(max_score, score);
    }
    double total = 0.0;
    for (int j = 0; j < n; ++j) {
      if (graph.adjacency(i, j) == 0) continue;
      rho(i, j) = std::exp(rho(i, j) - max_score);
      total += rho(i, j);
    }
    for (int j = 0; j < n; ++j) {
      if (graph.adjacency(i, j) == 0) continue;
      rho(i, j) /= total;
    }
  }
  return rho;
}

Eigen::MatrixXd gat_layer(const ForestGraph& graph, const Eigen::MatrixXd& input,
                          const GatLayerParams& params) {
  const Eigen::MatrixXd rho = gat_attention(graph, input, params);
  Eigen::MatrixXd out = rho * (input * params.w_value.transpose());
  return out.unaryExpr([](double x) { return sigmoid(x); });
}

Eigen::MatrixXd encode(const ForestGraph& graph, const EncoderParams& params) {
  if (params.layers.empty()) {
    throw ValidationError("encoder needs at least one layer");
  }
  check_graph(graph, params);
  Eigen::MatrixXd hidden = graph.embeddings;
  for (const auto& layer : params.layers) {
    hidden = gat_layer(graph, hidden, layer);
  }
  Eigen::MatrixXd encoded(graph.node_count, 2 * params.dim);
  encoded << graph.embeddings, hidden;
  return encoded;
}

Eigen::VectorXd biaffine_score(const Eigen::MatrixXd& encoded, int subj_node,
                               int obj_node, const EncoderParams& params) {
  if (subj_node < 0 || subj_node >= encoded.rows() || obj_node < 0 ||
      obj_node >= encoded.rows()) {
    throw ValidationError("biaffine node index out of range");
  }
  if (encoded.cols() != 2 * params.dim) {
    throw ValidationError("biaffine input width does not match encoder dim");
  }
  const Eigen::VectorXd h_subj = encoded.row(subj_node).head(params.dim);
  const Eigen::VectorXd h_obj = encoded.row(obj_node).head(params.dim);
  const Eigen::VectorXd pooled = encoded.colwise().mean();

  Eigen::VectorXd logits(params.label_count);
  for (int l = 0; l < params.label_count; ++l) {
    logits(l) = h_subj.dot(params.rel_bilinear[l] * h_obj) +
                params.rel_linear.row(l).dot(pooled);
  }
  const double max_logit = logits.maxCoeff();
  Eigen::VectorXd probs = (logits.array() - max_logit).exp();
  return probs / probs.sum();
}

Eigen::VectorXd HashEmbedder::operator()(std::string_view form) const {
  // FNV-1a over the UTF-8 bytes, mixed with the seed, then used to key a
  // generator: the same form and seed always produce the same vector.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char byte : form) {
    h ^= byte;
    h *= 0x100000001b3ULL;
  }
  h ^= seed * 0x9e3779b97f4a7c15ULL;
  std::mt19937_64 gen(h);
  Eigen::VectorXd v(dim);
  for (int i = 0; i < dim; ++i) {
    v(i) = uniform_in(gen, -1.0, 1.0);
  }
  return v;
}

}  // namespace udforest
