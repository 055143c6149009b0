#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "latent/graph.hpp"
#include "latent/matrix.hpp"
#include "latent/parallel.hpp"

namespace latent {

enum class HiddenKind { TwoMoon, UniformSquare, GaussianBlobs };

inline std::string_view to_string(HiddenKind kind) {
  switch (kind) {
    case HiddenKind::TwoMoon: return "two-moon";
    case HiddenKind::UniformSquare: return "uniform-square";
    case HiddenKind::GaussianBlobs: return "gaussian-blobs";
  }
  return "unknown";
}

inline HiddenKind parse_hidden_kind(std::string_view s) {
  if (s == "two-moon") return HiddenKind::TwoMoon;
  if (s == "uniform-square") return HiddenKind::UniformSquare;
  if (s == "gaussian-blobs") return HiddenKind::GaussianBlobs;
  throw Error("unknown dataset kind: " + std::string(s));
}

struct HiddenSample {
  Matrix z;
  std::vector<int> labels;  // empty when the generator has no classes
};

// Two-moon geometry: unit half-circles, the second one flipped and centered at (1, 0.5).
inline constexpr double kMoonRadius = 1.0;
inline constexpr double kMoonOffsetX = 1.0;
inline constexpr double kMoonOffsetY = 0.5;
inline constexpr double kBlobSpread = 4.0;

/**
 * Draws n i.i.d. hidden coordinates.
 *
 * two-moon (d must be 2): class 0 on the upper half-circle of radius 1 at the
 * origin, class 1 on the lower half-circle centered at (1, 0.5), each point
 * perturbed by isotropic Gaussian noise with standard deviation `noise`.
 * uniform-square: uniform on [0,1]^d (noise ignored).
 * gaussian-blobs: equal mixture of three unit-variance Gaussians whose centers
 * lie on a circle of radius 4 in the first two axes (on a line when d = 1).
 */
inline HiddenSample sample_hidden(HiddenKind kind, std::size_t n, std::size_t d, double noise,
                                  std::uint64_t seed) {
  if (n == 0) throw Error("sample_hidden: n must be positive");
  if (d == 0) throw Error("sample_hidden: dimension must be positive");
  if (!(noise >= 0.0)) throw Error("sample_hidden: noise must be nonnegative");
  if (kind == HiddenKind::TwoMoon && d != 2) throw Error("two-moon requires d = 2");

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  HiddenSample s;
  s.z = Matrix(n, d);

  switch (kind) {
    case HiddenKind::TwoMoon: {
      s.labels.resize(n);
      for (std::size_t i = 0; i < n; ++i) {
        const int label = unit(rng) < 0.5 ? 0 : 1;
        const double t = std::numbers::pi * unit(rng);
        double x = kMoonRadius * std::cos(t);
        double y = kMoonRadius * std::sin(t);
        if (label == 1) {
          x = kMoonOffsetX - x;
          y = kMoonOffsetY - y;
        }
        s.z(i, 0) = x + noise * gauss(rng);
        s.z(i, 1) = y + noise * gauss(rng);
        s.labels[i] = label;
      }
      break;
    }
    case HiddenKind::UniformSquare:
      for (double& v : s.z.values()) v = unit(rng);
      break;
    case HiddenKind::GaussianBlobs: {
      s.labels.resize(n);
      std::uniform_int_distribution<int> pick(0, 2);
      for (std::size_t i = 0; i < n; ++i) {
        const int label = pick(rng);
        std::vector<double> center(d, 0.0);
        if (d == 1) {
          center[0] = kBlobSpread * (label - 1);
        } else {
          const double angle = 2.0 * std::numbers::pi * label / 3.0;
          center[0] = kBlobSpread * std::cos(angle);
          center[1] = kBlobSpread * std::sin(angle);
        }
        for (std::size_t j = 0; j < d; ++j) s.z(i, j) = center[j] + gauss(rng);
        s.labels[i] = label;
      }
      break;
    }
  }
  return s;
}

// floor(sqrt(n) ln(n) / 10).
inline std::size_t paper_k(std::size_t n) {
  const double nd = static_cast<double>(n);
  const double k = n == 0 ? 0.0 : std::floor(std::sqrt(nd) * std::log(nd) / 10.0);
  if (k < 1.0) throw Error("graph too small for paper_k (n = " + std::to_string(n) + ")");
  return static_cast<std::size_t>(k);
}

namespace detail {

inline double sq_dist(const Matrix& z, std::size_t a, std::size_t b) {
  double s = 0.0;
  for (std::size_t c = 0; c < z.cols(); ++c) {
    const double diff = z(a, c) - z(b, c);
    s += diff * diff;
  }
  return s;
}

// The k nearest other rows of v as (squared distance, id), ascending, ties by id.
inline std::vector<std::pair<double, NodeId>> nearest(const Matrix& z, NodeId v, std::size_t k) {
  std::vector<std::pair<double, NodeId>> cand;
  cand.reserve(z.rows() - 1);
  for (NodeId u = 0; u < z.rows(); ++u)
    if (u != v) cand.emplace_back(sq_dist(z, v, u), u);
  std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(k), cand.end());
  cand.resize(k);
  return cand;
}

inline void check_knn_args(const Matrix& z, std::size_t k) {
  if (k == 0) throw Error("k must be positive");
  if (k >= z.rows()) throw Error("k must be smaller than the number of points");
  if (!all_finite(z)) throw Error("hidden features contain non-finite values");
}

}  // namespace detail

// Arc v -> u for each of the k Euclidean nearest neighbors u of v (ties: lower id).
inline DirectedGraph build_knn_graph(const Matrix& z, std::size_t k, std::size_t threads = 1) {
  detail::check_knn_args(z, k);
  const std::size_t n = z.rows();
  std::vector<Arc> arcs(n * k);
  parallel_for(n, threads, [&](std::size_t v) {
    const auto nn = detail::nearest(z, v, k);
    for (std::size_t j = 0; j < k; ++j) arcs[v * k + j] = {v, nn[j].second};
  });
  return build_graph(n, arcs);
}

// Distance from each row to its k-th nearest other row.
inline std::vector<double> kth_neighbor_distance(const Matrix& z, std::size_t k, std::size_t threads = 1) {
  detail::check_knn_args(z, k);
  std::vector<double> r(z.rows());
  parallel_for(z.rows(), threads, [&](std::size_t v) { r[v] = std::sqrt(detail::nearest(z, v, k).back().first); });
  return r;
}

/**
 * Per-node radii for which build_threshold_graph reproduces the kNN graph:
 * the k-th neighbor distance nudged up by one ulp, so that the strict
 * comparison admits the k-th neighbor itself.
 */
inline std::vector<double> knn_radii(const Matrix& z, std::size_t k, std::size_t threads = 1) {
  auto r = kth_neighbor_distance(z, k, threads);
  for (double& x : r) x = std::nextafter(x, std::numeric_limits<double>::infinity());
  return r;
}

// Arc v -> u iff ||z_v - z_u|| < radii[v].
inline DirectedGraph build_threshold_graph(const Matrix& z, std::span<const double> radii,
                                           std::size_t threads = 1) {
  const std::size_t n = z.rows();
  if (radii.size() != n) throw Error("threshold graph: one radius per node required");
  for (double r : radii)
    if (!(r > 0.0)) throw Error("threshold graph: radii must be positive");
  std::vector<std::vector<Arc>> per_node(n);
  parallel_for(n, threads, [&](std::size_t v) {
    for (NodeId u = 0; u < n; ++u)
      if (u != v && std::sqrt(detail::sq_dist(z, v, u)) < radii[v]) per_node[v].push_back({v, u});
  });
  std::vector<Arc> arcs;
  for (auto& a : per_node) arcs.insert(arcs.end(), a.begin(), a.end());
  return build_graph(n, arcs);
}

// Sorted landmark ids drawn uniformly without replacement.
struct LandmarkSet {
  std::vector<NodeId> ids;

  std::size_t size() const noexcept { return ids.size(); }
  bool empty() const noexcept { return ids.empty(); }
  friend bool operator==(const LandmarkSet&, const LandmarkSet&) = default;
};

// Partial Fisher-Yates shuffle, first m positions kept, then sorted.
inline LandmarkSet select_landmarks(std::size_t n, std::size_t m, std::uint64_t seed) {
  if (m == 0) throw Error("landmark count must be positive");
  if (m > n) throw Error("landmark count " + std::to_string(m) + " exceeds node count " + std::to_string(n));
  std::vector<NodeId> pool(n);
  std::iota(pool.begin(), pool.end(), 0);
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < m; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, n - 1);
    std::swap(pool[i], pool[pick(rng)]);
  }
  pool.resize(m);
  std::sort(pool.begin(), pool.end());
  return {std::move(pool)};
}

/**
 * Structural node features [d_v, n, one-hot landmark id].
 *
 * Column 0 is the out-degree, column 1 the node count, and columns 2.. the
 * indicator e_i when v is the i-th landmark (zeros otherwise). With no
 * landmarks this is the plain [d_v, n] feature.
 */
inline FeatureMatrix make_node_features(const DirectedGraph& g, const LandmarkSet& landmarks) {
  const std::size_t n = g.node_count();
  const std::size_t m = landmarks.size();
  FeatureMatrix x(n, 2 + m);
  for (NodeId v = 0; v < n; ++v) {
    x(v, 0) = static_cast<double>(g.out_degree(v));
    x(v, 1) = static_cast<double>(n);
  }
  for (std::size_t i = 0; i < m; ++i) {
    if (landmarks.ids[i] >= n) throw Error("landmark id out of range");
    x(landmarks.ids[i], 2 + i) = 1.0;
  }
  return x;
}

}  // namespace latent
