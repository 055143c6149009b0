#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "latent/direct.hpp"
#include "latent/message_passing.hpp"
#include "latent/numerics.hpp"
#include "latent/procrustes.hpp"
#include "latent/recovery_programs.hpp"
#include "support.hpp"

using namespace latent;

namespace {

// [l_v, e(m)] for the given lengths and landmarks.
Matrix length_state(const std::vector<double>& lengths, const LandmarkSet& lm) {
  const std::size_t n = lengths.size(), m = lm.size();
  Matrix h(n, 1 + m);
  for (std::size_t v = 0; v < n; ++v) h(v, 0) = lengths[v];
  for (std::size_t i = 0; i < m; ++i) h(lm.ids[i], 1 + i) = 1.0;
  return h;
}

// Per-node distance vectors (n x m) after running Bellman-Ford layers.
Matrix bellman_ford(const DirectedGraph& g, const std::vector<double>& lengths, const LandmarkSet& lm,
                    std::vector<Matrix>* trace = nullptr) {
  const std::size_t n = g.node_count(), m = lm.size();
  Matrix h = length_state(lengths, lm);
  for (const auto& layer : bellman_ford_program(m, n, lengths)) {
    h = step_layer(g, h, layer);
    if (trace) {
      Matrix d(n, m);
      for (std::size_t v = 0; v < n; ++v)
        for (std::size_t i = 0; i < m; ++i) d(v, i) = h(v, 1 + m + i);
      trace->push_back(d);
    }
  }
  Matrix d(n, m);
  for (std::size_t v = 0; v < n; ++v)
    for (std::size_t i = 0; i < m; ++i) d(v, i) = h(v, 1 + m + i);
  return d;
}

// Landmark matrix held by every node after propagation; one m x m matrix per node.
std::vector<Matrix> propagate(const DirectedGraph& g, const std::vector<double>& lengths, const LandmarkSet& lm) {
  const std::size_t n = g.node_count(), m = lm.size();
  Matrix h = length_state(lengths, lm);
  h = run_layers(g, h, bellman_ford_program(m, n, lengths));
  h = run_layers(g, h, landmark_matrix_program(m, n, inf_sentinel(lengths)));
  std::vector<Matrix> out;
  for (std::size_t v = 0; v < n; ++v) {
    Matrix d(m, m);
    for (std::size_t k = 0; k < m * m; ++k) d.values()[k] = h(v, 1 + 2 * m + k);
    out.push_back(d);
  }
  return out;
}

}  // namespace

TEST(EdgeLength, Examples) {
  EXPECT_NEAR(edge_length_readout(16, 1000, 1, {1.0, 2}), std::pow(0.016, 0.25), 1e-15);
  EXPECT_NEAR(edge_length_readout(16, 1000, 1, {1.0, 2}), 0.3556558820077846, 1e-15);
  EXPECT_EQ(edge_length_readout(1, 1, 1, {1.0, 1}), 1.0);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.1, 10.0);
  for (int t = 0; t < 100; ++t) {
    const double deg = std::floor(u(rng)) + 1, n = 100 * u(rng), stat = u(rng);
    EXPECT_DOUBLE_EQ(edge_length_readout(deg, n, stat, {2.0, 2}), 2.0 * edge_length_readout(deg, n, stat, {1.0, 2}));
  }
}

TEST(EdgeLength, NonpositiveStationary) {
  try {
    edge_length_readout(3, 10, 0.0, {1.0, 2});
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("stationary estimate not positive"), std::string::npos);
  }
  EXPECT_THROW(edge_length_readout(3, 10, -1.0, {1.0, 2}), Error);
}

TEST(EdgeLength, ReadoutLayerFloorsStationary) {
  const ScaleParams p{1.0, 2};
  const auto layer = scale_readout_layer(p, 0, 0.5);
  std::vector<double> self{4, 10, 0.0}, out(1);
  layer.update(self, {}, out);
  EXPECT_DOUBLE_EQ(out[0], edge_length_readout(4, 10, 0.5, p));
}

TEST(BellmanFord, SinglePath) {
  const auto g = build_graph(3, {{0, 1}, {1, 2}});
  const auto d = bellman_ford(g, {1.0, 2.0, 7.0}, {{0}});
  EXPECT_EQ(d, Matrix::from_rows({{0}, {1}, {3}}));
}

TEST(BellmanFord, SelfDistanceIsZero) {
  // Landmark 1 is reachable from itself only by the cycle 1 -> 2 -> 0 -> 1.
  const auto g = build_graph(3, {{1, 2}, {2, 0}, {0, 1}});
  const auto d = bellman_ford(g, {1, 1, 1}, {{1}});
  EXPECT_EQ(d(1, 0), 0.0);
  EXPECT_EQ(d(2, 0), 1.0);
  EXPECT_EQ(d(0, 0), 2.0);
}

TEST(BellmanFord, ShorterOfTwoRoutes) {
  // 0 -> 1 -> 3 costs 2 + 3 = 5; 0 -> 2 -> 3 costs 2 + 2 = 4.
  const auto g = build_graph(4, {{0, 1}, {0, 2}, {1, 3}, {2, 3}, {3, 0}});
  const auto d = bellman_ford(g, {2.0, 3.0, 2.0, 1.0}, {{0}});
  EXPECT_EQ(d(3, 0), 4.0);
}

TEST(BellmanFord, UnreachableIsSentinel) {
  const std::vector<double> len{1, 1, 1};
  const auto d = bellman_ford(build_graph(3, {{1, 0}, {2, 1}}), len, {{0}});
  EXPECT_EQ(d(1, 0), inf_sentinel(len));
  EXPECT_EQ(inf_sentinel(len), 4.0);
}

TEST(BellmanFord, LayerCount) {
  EXPECT_EQ(bellman_ford_program(2, 10, std::vector<double>(10, 1.0)).size(), 9u);
  EXPECT_THROW(bellman_ford_program(1, 2, std::vector<double>{1.0, 0.0}), Error);
}

TEST(LandmarkMatrix, SingleLandmark) {
  std::mt19937_64 rng(1);
  const auto g = support::random_strong_graph(8, 6, rng);
  for (const auto& d : propagate(g, std::vector<double>(8, 1.5), {{3}})) EXPECT_EQ(d, Matrix::from_rows({{0}}));
}

TEST(LandmarkMatrix, DirectedThreeCycle) {
  const auto g = build_graph(3, {{0, 1}, {1, 2}, {2, 0}});
  // 0 -> 1 is one arc; 1 -> 0 goes around through 2.
  for (const auto& d : propagate(g, {1, 1, 1}, {{0, 1}})) EXPECT_EQ(d, Matrix::from_rows({{0, 1}, {2, 0}}));
}

TEST(LandmarkMatrix, DisconnectedPairGetsSentinel) {
  // Two 2-cycles {0,1} and {2,3}.
  const auto g = build_graph(4, {{0, 1}, {1, 0}, {2, 3}, {3, 2}});
  const std::vector<double> len{1, 1, 1, 1};
  const double inf = inf_sentinel(len);
  for (const auto& d : propagate(g, len, {{0, 2}})) {
    EXPECT_EQ(d(0, 1), inf);
    EXPECT_EQ(d(1, 0), inf);
  }
}

TEST(FinalReadout, LandmarkKeepsOwnRow) {
  const auto coords = Matrix::from_rows({{0, 0}, {1, 0}, {0, 1}, {1, 1}});
  const std::vector<double> dist{5, 5, 5, 0};
  EXPECT_EQ(final_readout(coords, dist, std::optional<std::size_t>(3), 100.0), (std::vector<double>{1, 1}));
}

TEST(FinalReadout, NearestLandmarkRow) {
  const auto coords = Matrix::from_rows({{0, 0}, {1, 0}, {0, 1}});
  EXPECT_EQ(final_readout(coords, std::vector<double>{2.0, 1.0, 5.0}, std::nullopt, 100.0), (std::vector<double>{1, 0}));
  EXPECT_EQ(final_readout(coords, std::vector<double>{1.0, 1.0}, std::nullopt, 100.0), (std::vector<double>{0, 0}));
}

TEST(FinalReadout, UnreachableNode) {
  const auto coords = Matrix::from_rows({{0, 0}, {1, 0}});
  try {
    final_readout(coords, std::vector<double>{100.0, 100.0}, std::nullopt, 100.0);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("node unreachable from all landmarks"), std::string::npos);
  }
}

TEST(FinalReadout, MdsFormUsesSymmetrizedMatrix) {
  // Unit-square corners, D exact; a node nearest landmark 2 receives MDS row 2.
  const auto pts = Matrix::from_rows({{0, 0}, {1, 0}, {1, 1}, {0, 1}});
  const Matrix d = pairwise_distances(pts);
  const auto mds = classical_mds(d, 2);
  const auto row = final_readout(d, std::vector<double>{3, 3, 0.1, 3}, std::nullopt, 2, 1e9);
  EXPECT_EQ(row, (std::vector<double>{mds(2, 0), mds(2, 1)}));
}

TEST(Symmetrize, OneSidedAndMissingPairs) {
  const double inf = 50;
  const auto d = Matrix::from_rows({{0, 2, inf}, {4, 0, 6}, {inf, inf, 0}});
  EXPECT_EQ(symmetrize_landmark_matrix(d, inf), Matrix::from_rows({{0, 3, inf}, {3, 0, 6}, {inf, 6, 0}}));
}

class ProgramProperties : public ::testing::TestWithParam<int> {};

TEST_P(ProgramProperties, BellmanFordMatchesFloydWarshall) {
  std::mt19937_64 rng(GetParam());
  const std::size_t n = 40;
  const auto g = GetParam() % 2 ? support::random_strong_graph(n, 50, rng) : support::random_weak_graph(n, 50, rng);
  std::uniform_real_distribution<double> u(0.1, 2.0);
  std::vector<double> len(n);
  for (double& l : len) l = u(rng);
  const auto lm = select_landmarks(n, 6, GetParam());
  const double inf = inf_sentinel(len);
  const Matrix fw = support::floyd_warshall(g, len, inf);
  std::vector<Matrix> trace;
  const Matrix d = bellman_ford(g, len, lm, &trace);
  for (std::size_t v = 0; v < n; ++v)
    for (std::size_t i = 0; i < lm.size(); ++i) {
      const double want = fw(lm.ids[i], v);
      if (want >= inf)
        EXPECT_EQ(d(v, i), inf);
      else
        EXPECT_NEAR(d(v, i), want, 1e-12);
      EXPECT_EQ(d(v, i) == 0.0, v == lm.ids[i]);
    }
  // Entries never increase from one layer to the next.
  for (std::size_t l = 1; l < trace.size(); ++l)
    for (std::size_t k = 0; k < d.values().size(); ++k) ASSERT_LE(trace[l].values()[k], trace[l - 1].values()[k]);
  // The program agrees with Dijkstra exactly.
  const auto dj = landmark_distances_direct(g, lm, len);
  for (std::size_t k = 0; k < d.values().size(); ++k) EXPECT_NEAR(d.values()[k], dj.per_node.values()[k], 1e-12);
}

TEST_P(ProgramProperties, TriangleInequalityOnStrongGraphs) {
  std::mt19937_64 rng(GetParam() + 30);
  const std::size_t n = 50;
  const auto g = support::random_strong_graph(n, 100, rng);
  std::uniform_real_distribution<double> u(0.1, 2.0);
  std::vector<double> len(n);
  for (double& l : len) l = u(rng);
  const auto lm = select_landmarks(n, 8, GetParam());
  const auto all = propagate(g, len, lm);
  const Matrix& d = all[0];
  for (std::size_t i = 0; i < 8; ++i) {
    EXPECT_EQ(d(i, i), 0.0);
    for (std::size_t j = 0; j < 8; ++j)
      for (std::size_t k = 0; k < 8; ++k) EXPECT_LE(d(i, k), d(i, j) + d(j, k) + 1e-9);
  }
  // Identical matrix at every node.
  for (const auto& other : all) EXPECT_EQ(other, d);
}

INSTANTIATE_TEST_SUITE_P(Seeds, ProgramProperties, ::testing::Range(1, 11));
