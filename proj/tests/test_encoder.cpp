#include <doctest.h>

#include <Eigen/Dense>
#include <random>
#include <vector>

#include "udforest/encoder.hpp"
#include "udforest/errors.hpp"

using namespace udforest;

namespace {

// Chain 0-1-...-(n-1) with self-loops and hash-derived embeddings.
ForestGraph chain_graph(int n, int dim, std::uint64_t seed) {
  ForestGraph g;
  g.sent_id = "chain";
  g.node_count = n;
  g.adjacency = Eigen::MatrixXi::Identity(n, n);
  for (int i = 0; i + 1 < n; ++i) {
    g.adjacency(i, i + 1) = 1;
    g.adjacency(i + 1, i) = 1;
  }
  g.embeddings.resize(n, dim);
  const HashEmbedder embed{dim, seed};
  for (int i = 0; i < n; ++i) {
    g.embeddings.row(i) = embed("node-" + std::to_string(i)).transpose();
  }
  return g;
}

}  // namespace

TEST_CASE("attention on a single node is the trivial distribution") {
  const ForestGraph g = chain_graph(1, 4, 7);
  const EncoderParams p = EncoderParams::random(4, 2, 1, 7);
  const Eigen::MatrixXd rho = gat_attention(g, g.embeddings, p.layers[0]);
  REQUIRE(rho.rows() == 1);
  CHECK(rho(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("attention rows are distributions over the neighbour set") {
  const ForestGraph g = chain_graph(6, 8, 11);
  const EncoderParams p = EncoderParams::random(8, 3, 1, 11);
  const Eigen::MatrixXd rho = gat_attention(g, g.embeddings, p.layers[0]);
  for (int i = 0; i < g.node_count; ++i) {
    double row_sum = 0.0;
    for (int j = 0; j < g.node_count; ++j) {
      if (g.adjacency(i, j) == 0) {
        CHECK(rho(i, j) == 0.0);
      } else {
        CHECK(rho(i, j) > 0.0);
        row_sum += rho(i, j);
      }
    }
    CHECK(row_sum == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("identical node embeddings attend uniformly") {
  ForestGraph g = chain_graph(5, 6, 3);
  const Eigen::RowVectorXd row = g.embeddings.row(0);
  for (int i = 1; i < g.node_count; ++i) g.embeddings.row(i) = row;
  const EncoderParams p = EncoderParams::random(6, 2, 1, 3);
  const Eigen::MatrixXd rho = gat_attention(g, g.embeddings, p.layers[0]);
  for (int i = 0; i < g.node_count; ++i) {
    const int degree = g.adjacency.row(i).sum();
    for (int j = 0; j < g.node_count; ++j) {
      if (g.adjacency(i, j) == 1) {
        CHECK(rho(i, j) == doctest::Approx(1.0 / degree).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("layer outputs stay inside the sigmoid range") {
  const ForestGraph g = chain_graph(7, 12, 19);
  const EncoderParams p = EncoderParams::random(12, 2, 1, 19);
  const Eigen::MatrixXd u = gat_layer(g, g.embeddings, p.layers[0]);
  REQUIRE(u.rows() == 7);
  REQUIRE(u.cols() == 12);
  CHECK((u.array() > 0.0).all());
  CHECK((u.array() < 1.0).all());
}

TEST_CASE("encode concatenates the inputs with the stacked output") {
  const ForestGraph g = chain_graph(4, 5, 23);
  const EncoderParams p = EncoderParams::random(5, 2, 3, 23);
  const Eigen::MatrixXd enc = encode(g, p);
  REQUIRE(enc.rows() == 4);
  REQUIRE(enc.cols() == 10);
  CHECK(enc.leftCols(5) == g.embeddings);
  // The right half is the last layer's sigmoid output.
  CHECK((enc.rightCols(5).array() > 0.0).all());
  CHECK((enc.rightCols(5).array() < 1.0).all());
}

TEST_CASE("equal seeds reproduce parameters and encodings bit for bit") {
  const EncoderParams a = EncoderParams::random(9, 4, 2, 42);
  const EncoderParams b = EncoderParams::random(9, 4, 2, 42);
  CHECK(a.layers[0].w_self == b.layers[0].w_self);
  CHECK(a.layers[1].attn == b.layers[1].attn);
  CHECK(a.rel_bilinear[3] == b.rel_bilinear[3]);
  CHECK(a.rel_linear == b.rel_linear);

  const ForestGraph g = chain_graph(5, 9, 42);
  const Eigen::MatrixXd e1 = encode(g, a);
  const Eigen::MatrixXd e2 = encode(g, b);
  CHECK(e1 == e2);

  const EncoderParams c = EncoderParams::random(9, 4, 2, 43);
  CHECK(a.layers[0].w_self != c.layers[0].w_self);
}

TEST_CASE("random parameters stay within the init range") {
  const int dim = 16;
  const EncoderParams p = EncoderParams::random(dim, 3, 2, 5);
  const double bound = 1.0 / 4.0;  // 1/sqrt(16)
  for (const GatLayerParams& layer : p.layers) {
    CHECK(layer.w_self.cwiseAbs().maxCoeff() <= bound);
    CHECK(layer.w_neigh.cwiseAbs().maxCoeff() <= bound);
    CHECK(layer.w_value.cwiseAbs().maxCoeff() <= bound);
    CHECK(layer.attn.cwiseAbs().maxCoeff() <= bound);
  }
  CHECK(p.rel_linear.cwiseAbs().maxCoeff() <= bound);
}

TEST_CASE("encoding is equivariant under node relabelling") {
  const int n = 6, dim = 7;
  const ForestGraph g = chain_graph(n, dim, 31);
  const EncoderParams p = EncoderParams::random(dim, 2, 2, 31);
  const Eigen::MatrixXd enc = encode(g, p);

  std::vector<int> perm(n);
  for (int i = 0; i < n; ++i) perm[i] = i;
  std::mt19937_64 gen(8);
  std::shuffle(perm.begin(), perm.end(), gen);

  ForestGraph h;
  h.sent_id = g.sent_id;
  h.node_count = n;
  h.adjacency.resize(n, n);
  h.embeddings.resize(n, dim);
  for (int i = 0; i < n; ++i) {
    h.embeddings.row(perm[i]) = g.embeddings.row(i);
    for (int j = 0; j < n; ++j) h.adjacency(perm[i], perm[j]) = g.adjacency(i, j);
  }
  const Eigen::MatrixXd enc_p = encode(h, p);
  for (int i = 0; i < n; ++i) {
    CHECK((enc_p.row(perm[i]) - enc.row(i)).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("biaffine scores are a distribution over labels") {
  const ForestGraph g = chain_graph(5, 6, 13);
  const EncoderParams p = EncoderParams::random(6, 4, 2, 13);
  const Eigen::MatrixXd enc = encode(g, p);
  const Eigen::VectorXd probs = biaffine_score(enc, 1, 3, p);
  REQUIRE(probs.size() == 4);
  CHECK((probs.array() > 0.0).all());
  CHECK(probs.sum() == doctest::Approx(1.0).epsilon(1e-12));
  // Ordered pairs generally score differently.
  const Eigen::VectorXd flipped = biaffine_score(enc, 3, 1, p);
  CHECK(probs != flipped);
}

TEST_CASE("zero parameters give the uniform label distribution") {
  const ForestGraph g = chain_graph(4, 5, 17);
  const EncoderParams p = EncoderParams::zeros(5, 5, 2);
  const Eigen::MatrixXd enc = encode(g, p);
  const Eigen::VectorXd probs = biaffine_score(enc, 0, 2, p);
  REQUIRE(probs.size() == 5);
  for (int l = 0; l < 5; ++l) {
    CHECK(probs(l) == doctest::Approx(0.2).epsilon(1e-12));
  }
}

TEST_CASE("hash embeddings are deterministic and bounded") {
  const HashEmbedder e{32, 99};
  const Eigen::VectorXd a = e("苹果");
  const Eigen::VectorXd b = e("苹果");
  REQUIRE(a.size() == 32);
  CHECK(a == b);
  CHECK(a.cwiseAbs().maxCoeff() <= 1.0);
  CHECK(e("apples") != a);
  const HashEmbedder other{32, 100};
  CHECK(other("苹果") != a);
}

TEST_CASE("shape and range violations are rejected") {
  const ForestGraph g = chain_graph(3, 4, 1);
  SUBCASE("no layers") {
    EncoderParams p = EncoderParams::random(4, 2, 1, 1);
    p.layers.clear();
    CHECK_THROWS_AS(encode(g, p), ValidationError);
  }
  SUBCASE("embedding width differs from the parameter dim") {
    const EncoderParams p = EncoderParams::random(6, 2, 1, 1);
    CHECK_THROWS_AS(encode(g, p), ValidationError);
  }
  SUBCASE("node index out of range") {
    const EncoderParams p = EncoderParams::random(4, 2, 1, 1);
    const Eigen::MatrixXd enc = encode(g, p);
    CHECK_THROWS_AS(biaffine_score(enc, -1, 1, p), ValidationError);
    CHECK_THROWS_AS(biaffine_score(enc, 0, 3, p), ValidationError);
  }
  SUBCASE("asymmetric adjacency") {
    ForestGraph bad = g;
    bad.adjacency(0, 2) = 1;  // no mirror entry
    const EncoderParams p = EncoderParams::random(4, 2, 1, 1);
    CHECK_THROWS_AS(encode(bad, p), ValidationError);
  }
}
