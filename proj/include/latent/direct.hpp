#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <queue>
#include <span>
#include <tuple>
#include <utility>
#include <vector>

#include "latent/graph.hpp"
#include "latent/parallel.hpp"
#include "latent/recovery_programs.hpp"
#include "latent/synthetic.hpp"

// Direct (non message-passing) forms of the recovery stages. They perform the
// same floating-point operations in the same order as the layer programs.

namespace latent {

struct StationaryEstimate {
  std::vector<double> values;  // ~ n * pi_v
  std::size_t layers = 0;
};

/**
 * Iterates the random walk from the all-ones vector.
 *
 * Stops after the first iterate (beyond the first) whose max-norm change is
 * below tol, or after max_layers iterates.
 */
inline StationaryEstimate stationary_direct(const DirectedGraph& g, double tol, std::size_t max_layers,
                                            WalkKind walk = WalkKind::Lazy) {
  const std::size_t n = g.node_count();
  if (max_layers == 0) throw Error("stationary estimation needs at least one layer");
  for (NodeId v = 0; v < n; ++v)
    if (g.out_degree(v) == 0) throw Error("dangling node: out-degree 0 at node " + std::to_string(v));

  std::vector<double> degree(n);
  for (NodeId v = 0; v < n; ++v) degree[v] = static_cast<double>(g.out_degree(v));

  StationaryEstimate est;
  std::vector<double> x(n, 1.0);
  std::vector<double> next(n);
  for (std::size_t layer = 1; layer <= max_layers; ++layer) {
    for (NodeId v = 0; v < n; ++v) {
      double incoming = 0.0;
      for (NodeId u : g.in_neighbors(v)) incoming = incoming + x[u] / degree[u];
      next[v] = detail::walk_step(walk, x[v], incoming);
    }
    double change = 0.0;
    for (NodeId v = 0; v < n; ++v) change = std::max(change, std::abs(next[v] - x[v]));
    x.swap(next);
    est.layers = layer;
    if (layer > 1 && change < tol) break;
  }
  est.values = std::move(x);
  return est;
}

// Single-source shortest paths with arc (s, t) of length lengths[s]; unreachable nodes get inf.
inline std::vector<double> dijkstra_from(const DirectedGraph& g, NodeId source, std::span<const double> lengths,
                                         double inf) {
  const std::size_t n = g.node_count();
  std::vector<double> dist(n, inf);
  std::vector<char> done(n, 0);
  using Entry = std::pair<double, NodeId>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap;
  dist[source] = 0.0;
  heap.emplace(0.0, source);
  while (!heap.empty()) {
    const auto [d, u] = heap.top();
    heap.pop();
    if (done[u]) continue;
    done[u] = 1;
    const double through = d + lengths[u];
    for (NodeId v : g.out_neighbors(u))
      if (through < dist[v]) {
        dist[v] = through;
        heap.emplace(through, v);
      }
  }
  return dist;
}

// One Dijkstra run per landmark, assembled by landmark index.
inline DistanceTable landmark_distances_direct(const DirectedGraph& g, const LandmarkSet& landmarks,
                                               std::span<const double> lengths, std::size_t threads = 1) {
  const std::size_t n = g.node_count();
  const std::size_t m = landmarks.size();
  DistanceTable t;
  t.inf = inf_sentinel(lengths);
  t.per_node = Matrix(n, m);
  parallel_for(m, threads, [&](std::size_t i) {
    const auto dist = dijkstra_from(g, landmarks.ids[i], lengths, t.inf);
    for (NodeId v = 0; v < n; ++v) t.per_node(v, i) = dist[v];
  });
  t.landmark_matrix = Matrix(m, m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) t.landmark_matrix(i, j) = t.per_node(landmarks.ids[j], i);
  return t;
}

/**
 * For every node, the landmark it reaches most cheaply along arcs (ties: lower
 * landmark index), by one multi-source Dijkstra over the reversed graph.
 * Nodes that reach no landmark get nullopt.
 */
inline std::vector<std::optional<std::size_t>> nearest_landmark_reverse(const DirectedGraph& g,
                                                                       const LandmarkSet& landmarks,
                                                                       std::span<const double> lengths) {
  const std::size_t n = g.node_count();
  constexpr double kUnset = std::numeric_limits<double>::infinity();
  std::vector<double> dist(n, kUnset);
  std::vector<std::optional<std::size_t>> owner(n);
  std::vector<char> done(n, 0);
  using Entry = std::tuple<double, std::size_t, NodeId>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap;
  for (std::size_t i = 0; i < landmarks.size(); ++i) {
    const NodeId u = landmarks.ids[i];
    dist[u] = 0.0;
    owner[u] = i;
    heap.emplace(0.0, i, u);
  }
  while (!heap.empty()) {
    const auto [d, i, x] = heap.top();
    heap.pop();
    if (done[x]) continue;
    done[x] = 1;
    // Arc y -> x has length lengths[y].
    for (NodeId y : g.in_neighbors(x)) {
      const double through = d + lengths[y];
      if (!done[y] && (through < dist[y] || (through == dist[y] && i < *owner[y]))) {
        dist[y] = through;
        owner[y] = i;
        heap.emplace(through, i, y);
      }
    }
  }
  return owner;
}

}  // namespace latent
