#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "latent/pipeline.hpp"
#include "latent/procrustes.hpp"
#include "support.hpp"

using namespace latent;

namespace {

RecoveryConfig config(std::size_t m, std::uint64_t seed, Engine engine = Engine::Direct) {
  RecoveryConfig cfg;
  cfg.m = m;
  cfg.seed = seed;
  cfg.engine = engine;
  cfg.unreachable = UnreachablePolicy::NearestByReverse;
  return cfg;
}

std::vector<std::size_t> iota_ids(std::size_t n) {
  std::vector<std::size_t> ids(n);
  std::iota(ids.begin(), ids.end(), 0);
  return ids;
}

std::string message_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

}  // namespace

class EngineAgreement : public ::testing::TestWithParam<int> {};

TEST_P(EngineAgreement, IdenticalCoordinates) {
  std::mt19937_64 rng(GetParam());
  std::uniform_int_distribution<std::size_t> size(30, 300);
  const std::size_t n = size(rng);
  const DirectedGraph g = GetParam() % 2 ? support::random_strong_graph(n, 2 * n, rng)
                                         : support::random_weak_graph(n, 2 * n, rng);
  const std::size_t m = 3 + GetParam() % 18;
  auto cfg = config(m, GetParam());
  cfg.kappa_model = KappaModel::fixed(0.5 + GetParam());
  const auto a = recover_features(g, cfg);
  cfg.engine = Engine::MessagePassing;
  const auto b = recover_features(g, cfg);
  EXPECT_EQ(a.landmarks, b.landmarks);
  EXPECT_LE(max_abs(a.coordinates - b.coordinates), 1e-12);
  EXPECT_LE(support::max_abs_diff(a.lengths, b.lengths), 1e-12);
  EXPECT_EQ(a.diagnostics.stationary_layers, b.diagnostics.stationary_layers);
}

INSTANTIATE_TEST_SUITE_P(RandomGraphs, EngineAgreement, ::testing::Range(1, 21));

TEST(Pipeline, AllNodesLandmarksNoWorse) {
  const auto z = sample_hidden(HiddenKind::UniformSquare, 50, 2, 0.0, 3).z;
  const auto g = build_knn_graph(z, 8);
  auto full = config(50, 1);
  full.dim = 2;
  const auto all = recover_features(g, full);
  const auto half = recover_features(g, config(25, 1));
  // Every node is a landmark, so the rows are exactly the MDS rows.
  EXPECT_EQ(all.diagnostics.landmarks, 50u);
  const Matrix sym = symmetrize_landmark_matrix(all.distances.landmark_matrix, all.distances.inf);
  EXPECT_LE(max_abs(all.coordinates - classical_mds(sym, 2)), 0.0);
  EXPECT_LE(scaled_procrustes(z, all.coordinates).residual, scaled_procrustes(z, half.coordinates).residual);
}

TEST(Pipeline, SeedDeterminismAndThreads) {
  std::mt19937_64 rng(5);
  const auto g = support::random_weak_graph(400, 1200, rng);
  auto cfg = config(30, 9);
  const auto a = recover_features(g, cfg);
  const auto b = recover_features(g, cfg);
  cfg.threads = 4;
  const auto c = recover_features(g, cfg);
  EXPECT_TRUE(std::ranges::equal(a.coordinates.values(), b.coordinates.values()));
  EXPECT_TRUE(std::ranges::equal(a.coordinates.values(), c.coordinates.values()));
}

TEST(Pipeline, KappaHomogeneity) {
  const auto ds = sample_hidden(HiddenKind::TwoMoon, 500, 2, 0.15, 2);
  const auto g = build_knn_graph(ds.z, paper_k(500));
  auto cfg = config(50, 4);
  const auto one = recover_features(g, cfg);
  for (double kappa : {0.01, 2.5, 40.0}) {
    cfg.kappa_model = KappaModel::fixed(kappa);
    const auto scaled = recover_features(g, cfg);
    EXPECT_LE(d_g(scaled.coordinates, kappa * one.coordinates), 1e-8 * std::max(1.0, kappa * kappa));
  }
}

TEST(Pipeline, LandmarkExactnessWithEuclideanDistances) {
  std::mt19937_64 rng(6);
  const std::size_t n = 200, m = 40;
  const Matrix z = support::random_matrix(n, 2, rng);
  const auto lm = select_landmarks(n, m, 7);
  DistanceTable table;
  table.inf = 1e9;
  table.per_node = Matrix(n, m);
  table.landmark_matrix = Matrix(m, m);
  auto dist = [&](std::size_t a, std::size_t b) {
    return std::hypot(z(a, 0) - z(b, 0), z(a, 1) - z(b, 1));
  };
  for (std::size_t v = 0; v < n; ++v)
    for (std::size_t i = 0; i < m; ++i) table.per_node(v, i) = dist(lm.ids[i], v);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) table.landmark_matrix(i, j) = dist(lm.ids[i], lm.ids[j]);
  const Matrix out = embed_from_distances(table, lm, 2);
  const Matrix truth_rows = select_rows(z, lm.ids);
  EXPECT_LE(d_g(truth_rows, select_rows(out, lm.ids)), 1e-8);

  // Per node: error <= distance to the nearest landmark + that landmark's alignment error.
  const auto map = fit_rigid(z, out, lm.ids, false);
  const Matrix aligned = map.apply(out);
  auto err = [&](std::size_t v) { return std::hypot(aligned(v, 0) - z(v, 0), aligned(v, 1) - z(v, 1)); };
  for (std::size_t v = 0; v < n; ++v) {
    const std::size_t k = nearest_landmark(table.per_node.row(v), table.inf);
    EXPECT_LE(err(v), table.per_node(v, k) + err(lm.ids[k]) + 1e-9) << "node " << v;
  }
}

TEST(Pipeline, ReconstructionScore) {
  const auto z = sample_hidden(HiddenKind::UniformSquare, 300, 2, 0.0, 8).z;
  const auto g = build_knn_graph(z, 6);
  EXPECT_EQ(reconstruction_score(z, g, 6), 1.0);
  const Matrix moved = support::translate(3.0 * (z * support::rotation2(0.7)), {1.0, -4.0});
  EXPECT_EQ(reconstruction_score(moved, g, 6), reconstruction_score(z, g, 6));

  const auto big = sample_hidden(HiddenKind::UniformSquare, 1000, 2, 0.0, 9).z;
  const auto gb = build_knn_graph(big, 10);
  const auto fresh = sample_hidden(HiddenKind::UniformSquare, 1000, 2, 0.0, 10).z;
  EXPECT_LT(reconstruction_score(fresh, gb, 10), 0.1);
}

TEST(Pipeline, DisconnectedInput) {
  const auto g = support::undirected(4, {{0, 1}, {2, 3}});
  EXPECT_NE(message_of([&] { recover_features(g, config(2, 1)); }).find("not weakly connected"), std::string::npos);
}

TEST(Pipeline, DanglingNode) {
  const auto g = build_graph(3, {{0, 1}, {1, 2}, {2, 0}, {0, 2}});
  const auto g2 = build_graph(3, {{0, 1}, {1, 0}, {0, 2}});
  auto cfg = config(2, 1);
  cfg.dim = 1;
  EXPECT_NO_THROW(recover_features(g, cfg));
  EXPECT_NE(message_of([&] { recover_features(g2, cfg); }).find("dangling"), std::string::npos);
}

TEST(Pipeline, UnreachableNodeIsNamed) {
  // Node 3 only points into the cycle; no landmark on the cycle can reach it.
  const auto g = build_graph(4, {{0, 1}, {1, 2}, {2, 0}, {3, 0}});
  RecoveryConfig cfg;
  cfg.m = 2;
  cfg.dim = 1;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    cfg.seed = seed;
    const auto lm = select_landmarks(4, 2, seed);
    if (std::find(lm.ids.begin(), lm.ids.end(), 3u) != lm.ids.end()) continue;
    EXPECT_EQ(message_of([&] { recover_features(g, cfg); }), "node 3 unreachable from all landmarks");
    cfg.unreachable = UnreachablePolicy::NearestByReverse;
    const auto r = recover_features(g, cfg);
    EXPECT_EQ(r.diagnostics.reverse_assigned, 1u);
    // 3 -> 0 is its only arc, so the cheapest landmark it reaches is the first one along 0, 1, 2.
    const NodeId target = lm.ids[0];
    EXPECT_EQ(r.coordinates(3, 0), r.coordinates(target, 0));
    return;
  }
  FAIL() << "no seed left node 3 out of the landmarks";
}

TEST(Pipeline, ReverseFallbackPicksCheapestLandmark) {
  // Landmarks 1 and 2; node 0 reaches 1 in one hop and 2 in two.
  const auto g = build_graph(4, {{0, 1}, {1, 2}, {2, 3}, {3, 1}});
  const LandmarkSet lm{{1, 2}};
  const std::vector<double> lengths{1.0, 1.0, 1.0, 1.0};
  const auto r = nearest_landmark_reverse(g, lm, lengths);
  ASSERT_TRUE(r[0].has_value());
  EXPECT_EQ(*r[0], 0u);
  EXPECT_EQ(*r[1], 0u);
  EXPECT_EQ(*r[2], 1u);
  EXPECT_EQ(*r[3], 0u);
}

TEST(Pipeline, MessagePassingSizeLimit) {
  std::mt19937_64 rng(11);
  const auto g = support::random_strong_graph(kMessagePassingNodeLimit + 1, 10, rng);
  EXPECT_THROW(recover_features(g, config(3, 1, Engine::MessagePassing)), Error);
}

TEST(Pipeline, ConfigValidation) {
  const auto g = support::undirected(3, {{0, 1}, {1, 2}});
  auto cfg = config(2, 1);
  cfg.dim = 2;
  EXPECT_THROW(recover_features(g, cfg), Error);
  cfg.m = 4;
  cfg.dim = 1;
  EXPECT_THROW(recover_features(g, cfg), Error);
  RecoveryConfig defaults;
  EXPECT_EQ(defaults.landmark_count(3000), 500u);
  EXPECT_EQ(defaults.landmark_count(600), 300u);
  EXPECT_DOUBLE_EQ(defaults.tolerance(100), 1e-4);
}
