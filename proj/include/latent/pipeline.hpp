#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "latent/calibration.hpp"
#include "latent/direct.hpp"
#include "latent/graph.hpp"
#include "latent/message_passing.hpp"
#include "latent/numerics.hpp"
#include "latent/recovery_programs.hpp"
#include "latent/synthetic.hpp"

namespace latent {

enum class Engine { Direct, MessagePassing };

inline std::string_view to_string(Engine e) { return e == Engine::Direct ? "direct" : "mp"; }

inline Engine parse_engine(std::string_view s) {
  if (s == "direct") return Engine::Direct;
  if (s == "mp" || s == "message-passing") return Engine::MessagePassing;
  throw Error("unknown engine: " + std::string(s));
}

inline constexpr std::size_t kDefaultLandmarks = 500;
inline constexpr std::size_t kDefaultStationaryCap = 50000;
inline constexpr std::size_t kMessagePassingNodeLimit = 2000;

// What to do with a non-landmark node that no landmark reaches.
enum class UnreachablePolicy {
  Error,             // fail, naming the node
  NearestByReverse,  // use the landmark the node itself reaches most cheaply
};

inline std::string_view to_string(UnreachablePolicy p) {
  return p == UnreachablePolicy::Error ? "error" : "nearest-reverse";
}

inline UnreachablePolicy parse_unreachable_policy(std::string_view s) {
  if (s == "error") return UnreachablePolicy::Error;
  if (s == "nearest-reverse") return UnreachablePolicy::NearestByReverse;
  throw Error("unknown unreachable policy: " + std::string(s));
}

// Stationary estimates below 1/n (drained transient nodes) are raised to it before the length readout.
inline double stationary_floor(std::size_t n) { return 1.0 / static_cast<double>(n); }

struct RecoveryConfig {
  std::optional<std::size_t> m;  // unset: 500 clipped to floor(n/2)
  std::size_t dim = 2;
  KappaModel kappa_model = KappaModel::fixed(1.0);
  std::uint64_t seed = 0;
  Engine engine = Engine::Direct;
  WalkKind walk = WalkKind::Lazy;
  std::optional<double> stationary_tolerance;  // unset: 1 / n^2
  std::size_t max_stationary_layers = kDefaultStationaryCap;
  UnreachablePolicy unreachable = UnreachablePolicy::Error;
  std::size_t threads = 1;

  std::size_t landmark_count(std::size_t n) const {
    return m ? *m : std::min(kDefaultLandmarks, n / 2);
  }
  double tolerance(std::size_t n) const {
    const double nd = static_cast<double>(n);
    return stationary_tolerance ? *stationary_tolerance : 1.0 / (nd * nd);
  }
};

struct RecoveryDiagnostics {
  std::size_t landmarks = 0;
  double kappa = 0.0;
  std::size_t stationary_layers = 0;
  std::size_t bellman_ford_layers = 0;   // message-passing engine only
  std::size_t propagation_layers = 0;    // message-passing engine only
  std::size_t inf_entries = 0;           // unreachable (landmark, node) pairs
  std::size_t inf_landmark_pairs = 0;    // landmark pairs unreachable in both directions
  std::size_t floored_nodes = 0;         // stationary estimate raised to the floor
  std::size_t reverse_assigned = 0;      // nodes placed by the reverse fallback
  std::vector<double> mds_spectrum;
};

struct Recovery {
  FeatureMatrix coordinates;
  LandmarkSet landmarks;
  std::vector<double> stationary;
  std::vector<double> lengths;
  DistanceTable distances;
  RecoveryDiagnostics diagnostics;
};

/**
 * MDS on the symmetrized landmark matrix, then the per-node readout.
 * Landmarks keep their own rows; other nodes copy the nearest landmark's row.
 */
inline FeatureMatrix embed_from_distances(const DistanceTable& table, const LandmarkSet& landmarks,
                                          std::size_t dim, RecoveryDiagnostics* diag = nullptr,
                                          const std::vector<std::optional<std::size_t>>* reverse = nullptr) {
  const std::size_t n = table.per_node.rows();
  const std::size_t m = landmarks.size();
  const Matrix sym = symmetrize_landmark_matrix(table.landmark_matrix, table.inf);
  if (diag) {
    diag->inf_landmark_pairs = 0;
    for (double x : sym.values()) diag->inf_landmark_pairs += x >= table.inf;
  }
  auto mds = classical_mds_full(sym, dim);

  std::vector<std::optional<std::size_t>> slot(n);
  for (std::size_t i = 0; i < m; ++i) slot[landmarks.ids[i]] = i;

  FeatureMatrix out(n, dim);
  for (NodeId v = 0; v < n; ++v) {
    auto dist = table.per_node.row(v);
    const bool reached = std::any_of(dist.begin(), dist.end(), [&](double x) { return x < table.inf; });
    if (!slot[v] && !reached) {
      if (!reverse || !(*reverse)[v]) throw Error("node " + std::to_string(v) + " unreachable from all landmarks");
      auto r = mds.coordinates.row(*(*reverse)[v]);
      std::copy(r.begin(), r.end(), out.row(v).begin());
      if (diag) ++diag->reverse_assigned;
      continue;
    }
    const auto row = final_readout(mds.coordinates, dist, slot[v], table.inf);
    std::copy(row.begin(), row.end(), out.row(v).begin());
  }
  if (diag) diag->mds_spectrum = std::move(mds.spectrum);
  return out;
}

namespace detail {

inline std::vector<double> lengths_from(const DirectedGraph& g, std::span<const double> stationary,
                                        const ScaleParams& params) {
  const std::size_t n = g.node_count();
  const double floor = stationary_floor(n);
  std::vector<double> lengths(n);
  for (NodeId v = 0; v < n; ++v)
    lengths[v] = edge_length_readout(static_cast<double>(g.out_degree(v)), static_cast<double>(n),
                                     std::max(stationary[v], floor), params);
  return lengths;
}

inline void recover_direct(const DirectedGraph& g, const RecoveryConfig& cfg, const ScaleParams& params,
                           Recovery& r) {
  const std::size_t n = g.node_count();
  auto st = stationary_direct(g, cfg.tolerance(n), cfg.max_stationary_layers, cfg.walk);
  r.diagnostics.stationary_layers = st.layers;
  r.stationary = std::move(st.values);
  r.lengths = lengths_from(g, r.stationary, params);
  r.distances = landmark_distances_direct(g, r.landmarks, r.lengths, cfg.threads);
}

inline void recover_message_passing(const DirectedGraph& g, const RecoveryConfig& cfg, const ScaleParams& params,
                                    Recovery& r) {
  const std::size_t n = g.node_count();
  const std::size_t m = r.landmarks.size();
  if (n > kMessagePassingNodeLimit)
    throw Error("message-passing engine is limited to " + std::to_string(kMessagePassingNodeLimit) + " nodes");
  const FeatureMatrix x = make_node_features(g, r.landmarks);

  RunOptions stationary_opts{cfg.threads, stationary_converged(cfg.tolerance(n))};
  auto st = run_layers_until(g, x, stationary_program(cfg.max_stationary_layers, x.cols(), cfg.walk), stationary_opts);
  r.diagnostics.stationary_layers = st.layers_run;
  r.stationary.resize(n);
  for (NodeId v = 0; v < n; ++v) r.stationary[v] = st.state(v, st.state.cols() - 1);

  FeatureMatrix h = step_layer(g, st.state, scale_readout_layer(params, m, stationary_floor(n)), cfg.threads);
  r.lengths.resize(n);
  for (NodeId v = 0; v < n; ++v) r.lengths[v] = h(v, 0);

  RunOptions fixpoint{cfg.threads, unchanged};
  auto bf = run_layers_until(g, h, bellman_ford_program(m, n, r.lengths), fixpoint);
  r.diagnostics.bellman_ford_layers = bf.layers_run;
  const double inf = inf_sentinel(r.lengths);
  auto lm = run_layers_until(g, bf.state, landmark_matrix_program(m, n, inf), fixpoint);
  r.diagnostics.propagation_layers = lm.layers_run;

  DistanceTable& t = r.distances;
  t.inf = inf;
  t.per_node = Matrix(n, m);
  for (NodeId v = 0; v < n; ++v)
    for (std::size_t i = 0; i < m; ++i) t.per_node(v, i) = lm.state(v, 1 + m + i);
  // Each node holds copies of true entries or inf, so the element-wise min is the full matrix
  // even where some node was not reached by every landmark.
  t.landmark_matrix = Matrix(m, m, inf);
  const std::size_t base = 1 + 2 * m;
  for (NodeId v = 0; v < n; ++v)
    for (std::size_t k = 0; k < m * m; ++k)
      t.landmark_matrix.values()[k] = std::min(t.landmark_matrix.values()[k], lm.state(v, base + k));
}

}  // namespace detail

/**
 * Recovers node coordinates from graph structure alone.
 *
 * Stages: landmark selection, structural features, random-walk stationary
 * estimate, per-node arc lengths, landmark shortest paths, MDS of the
 * landmark matrix, nearest-landmark readout. Both engines compute identical
 * results; the message-passing engine executes the stages as layers.
 */
inline Recovery recover_features(const DirectedGraph& g, const RecoveryConfig& cfg) {
  const std::size_t n = g.node_count();
  if (!is_weakly_connected(g)) throw Error("input graph is not weakly connected");
  for (NodeId v = 0; v < n; ++v)
    if (g.out_degree(v) == 0) throw Error("dangling node: out-degree 0 at node " + std::to_string(v));
  const std::size_t m = cfg.landmark_count(n);
  if (m == 0 || m > n) throw Error("landmark count must be between 1 and n (got " + std::to_string(m) + ")");
  if (cfg.dim == 0 || cfg.dim >= m)
    throw Error("dimension must be between 1 and m - 1 (dim " + std::to_string(cfg.dim) + ", m " + std::to_string(m) +
                ")");

  Recovery r;
  r.landmarks = select_landmarks(n, m, cfg.seed);
  const ScaleParams params{cfg.kappa_model(n), cfg.dim};
  r.diagnostics.landmarks = m;
  r.diagnostics.kappa = params.kappa;

  if (cfg.engine == Engine::Direct)
    detail::recover_direct(g, cfg, params, r);
  else
    detail::recover_message_passing(g, cfg, params, r);

  for (double x : r.distances.per_node.values()) r.diagnostics.inf_entries += x >= r.distances.inf;
  for (double x : r.stationary) r.diagnostics.floored_nodes += x < stationary_floor(n);
  std::vector<std::optional<std::size_t>> reverse;
  if (cfg.unreachable == UnreachablePolicy::NearestByReverse)
    reverse = nearest_landmark_reverse(g, r.landmarks, r.lengths);
  r.coordinates = embed_from_distances(r.distances, r.landmarks, cfg.dim, &r.diagnostics,
                                       reverse.empty() ? nullptr : &reverse);
  return r;
}

// Jaccard similarity between the arc sets of g and the kNN graph of the recovered coordinates.
inline double reconstruction_score(const FeatureMatrix& recovered, const DirectedGraph& g, std::size_t k,
                                   std::size_t threads = 1) {
  if (recovered.rows() != g.node_count()) throw Error("reconstruction_score: one row per node required");
  const auto rebuilt = build_knn_graph(recovered, k, threads);
  const auto a = g.arcs();
  const auto b = rebuilt.arcs();
  std::size_t common = 0;
  for (std::size_t i = 0, j = 0; i < a.size() && j < b.size();) {
    if (a[i] < b[j]) {
      ++i;
    } else if (b[j] < a[i]) {
      ++j;
    } else {
      ++common;
      ++i;
      ++j;
    }
  }
  const std::size_t uni = a.size() + b.size() - common;
  return uni == 0 ? 1.0 : static_cast<double>(common) / static_cast<double>(uni);
}

}  // namespace latent
