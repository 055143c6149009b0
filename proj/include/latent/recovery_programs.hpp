#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "latent/matrix.hpp"
#include "latent/message_passing.hpp"
#include "latent/numerics.hpp"

namespace latent {

// Lazy walk applies x <- (x + R x) / 2; plain walk applies x <- R x.
enum class WalkKind { Lazy, Plain };

/**
 * Global scale of the recovered lengths.
 *
 * kappa = (c g_n^2)^(1/(dim+2)) folds together the density constant c and
 * the threshold scale g_n; only their combination is identifiable from one
 * graph.
 */
struct ScaleParams {
  double kappa = 1.0;
  std::size_t dim = 2;
};

// Shortest-path lengths from every landmark.
struct DistanceTable {
  Matrix per_node;         // n x m, (v, i) = length from landmark i to v
  Matrix landmark_matrix;  // m x m, (i, j) = length from landmark i to landmark j
  double inf = 0.0;        // sentinel for "no path"
};

// State layouts used by the programs below (m = landmark count):
//   features:            [d_v, n, e(m)]
//   after stationary:    [d_v, n, e(m), x]
//   after scale readout: [l_v, e(m)]
//   after Bellman-Ford:  [l_v, e(m), dist(m)]
//   after propagation:   [l_v, e(m), dist(m), D(m*m)]   D row-major, D[i*m + j] = length u_i -> u_j

namespace detail {

inline double walk_step(WalkKind walk, double current, double incoming) {
  return walk == WalkKind::Lazy ? 0.5 * (current + incoming) : incoming;
}

inline double sender_degree(std::span<const double> sender) {
  if (sender[0] < 1.0) throw Error("dangling node: out-degree 0 in random-walk estimation");
  return sender[0];
}

// Index of the landmark one-hot set in e, if any.
inline std::optional<std::size_t> landmark_slot(std::span<const double> e) {
  for (std::size_t i = 0; i < e.size(); ++i)
    if (e[i] == 1.0) return i;
  return std::nullopt;
}

}  // namespace detail

/**
 * Random-walk iteration on the all-ones start vector.
 *
 * The first layer consumes the node features (width `feature_width`, degree
 * in column 0) and appends x^(1)_v; each later layer replaces the last column
 * with the next iterate. Incoming mass is sum_{u -> v} x_u / d_u, so the
 * column sums to n at every layer; the last column tends to n * pi.
 */
inline LayerStack stationary_program(std::size_t layers, std::size_t feature_width = 2,
                                     WalkKind walk = WalkKind::Lazy) {
  if (layers == 0) throw Error("stationary_program: at least one layer required");
  if (feature_width < 1) throw Error("stationary_program: features must carry the degree");
  LayerStack stack;
  stack.reserve(layers);

  LayerProgram first;
  first.name = "stationary-init";
  first.in_width = feature_width;
  first.message_width = 1;
  first.out_width = feature_width + 1;
  first.reduction = Reduction::Sum;
  first.message = [](std::span<const double> s, std::span<double> msg) { msg[0] = 1.0 / detail::sender_degree(s); };
  first.update = [walk](std::span<const double> self, std::span<const double> a, std::span<double> out) {
    std::copy(self.begin(), self.end(), out.begin());
    out.back() = detail::walk_step(walk, 1.0, a[0]);
  };
  stack.push_back(std::move(first));

  LayerProgram mid;
  mid.name = "stationary-step";
  mid.in_width = feature_width + 1;
  mid.message_width = 1;
  mid.out_width = feature_width + 1;
  mid.reduction = Reduction::Sum;
  mid.message = [](std::span<const double> s, std::span<double> msg) { msg[0] = s.back() / detail::sender_degree(s); };
  mid.update = [walk](std::span<const double> self, std::span<const double> a, std::span<double> out) {
    std::copy(self.begin(), self.end(), out.begin());
    out.back() = detail::walk_step(walk, self.back(), a[0]);
  };
  for (std::size_t l = 1; l < layers; ++l) stack.push_back(mid);
  return stack;
}

// Stop rule for the stationary layers: max change of the last column below tol.
inline StopRule stationary_converged(double tol) {
  return [tol](const Matrix& before, const Matrix& after) {
    const std::size_t c = after.cols() - 1;
    double change = 0.0;
    for (std::size_t v = 0; v < after.rows(); ++v) change = std::max(change, std::abs(after(v, c) - before(v, c)));
    return change < tol;
  };
}

/**
 * Estimated length of every arc leaving v:
 *   l_v = kappa * (d_v / (n * stat))^(1/(dim+2)),  stat ~ n * pi_v.
 *
 * With the limit s(z_v) ~ (c d_v / (n^2 g^dim pi_v))^(1/(dim+2)), the arc
 * length g * s(z_v) equals (c g^2)^(1/(dim+2)) (d_v / (n * n pi_v))^(1/(dim+2)),
 * which is this formula with kappa = (c g^2)^(1/(dim+2)).
 */
inline double edge_length_readout(double degree, double n, double stat, const ScaleParams& params) {
  if (!(stat > 0.0)) throw Error("stationary estimate not positive");
  if (!(degree >= 1.0)) throw Error("edge length readout: degree must be at least 1");
  if (!(params.kappa > 0.0)) throw Error("kappa must be positive");
  if (params.dim == 0) throw Error("edge length readout: dimension must be positive");
  return params.kappa * std::pow(degree / (n * stat), 1.0 / static_cast<double>(params.dim + 2));
}

// Update-only layer: [d_v, n, e(m), x] -> [l_v, e(m)], with x raised to at least stat_floor.
inline LayerProgram scale_readout_layer(const ScaleParams& params, std::size_t landmark_count,
                                        double stat_floor = 0.0) {
  LayerProgram layer;
  layer.name = "scale-readout";
  layer.in_width = 3 + landmark_count;
  layer.message_width = 0;
  layer.out_width = 1 + landmark_count;
  layer.message = [](std::span<const double>, std::span<double>) {};
  layer.update = [params, landmark_count, stat_floor](std::span<const double> self, std::span<const double>,
                                                      std::span<double> out) {
    out[0] = edge_length_readout(self[0], self[1], std::max(self.back(), stat_floor), params);
    std::copy_n(self.begin() + 2, landmark_count, out.begin() + 1);
  };
  return layer;
}

// n * max(l) + 1 bounds every simple path length.
inline double inf_sentinel(std::span<const double> lengths) {
  double longest = 0.0;
  for (double l : lengths) longest = std::max(longest, l);
  return static_cast<double>(lengths.size()) * longest + 1.0;
}

/**
 * Landmark shortest paths by Bellman-Ford layers; arc (s, t) has length l_s.
 *
 * Layer 1 seeds the one-arc paths out of each landmark and sets each
 * landmark's own entry to 0; the remaining layers relax d_v <- min(d_v,
 * min_{u -> v} d_u + l_u). n - 1 layers in total cover every simple path.
 */
inline LayerStack bellman_ford_program(std::size_t m, std::size_t n, std::span<const double> lengths) {
  if (m == 0) throw Error("bellman_ford_program: landmark count must be positive");
  for (double l : lengths)
    if (!(l > 0.0)) throw Error("bellman_ford_program: lengths must be positive");
  const double inf = inf_sentinel(lengths);
  const std::size_t layers = std::max<std::size_t>(1, n - 1);
  LayerStack stack;
  stack.reserve(layers);

  LayerProgram first;
  first.name = "bellman-ford-init";
  first.in_width = 1 + m;
  first.message_width = m;
  first.out_width = 1 + 2 * m;
  first.reduction = Reduction::Min;
  first.identity = inf;
  first.message = [m, inf](std::span<const double> s, std::span<double> msg) {
    std::fill(msg.begin(), msg.end(), inf);
    if (auto i = detail::landmark_slot(s.subspan(1, m))) msg[*i] = s[0];
  };
  first.update = [m, inf](std::span<const double> self, std::span<const double> a, std::span<double> out) {
    std::copy(self.begin(), self.end(), out.begin());
    const auto own = detail::landmark_slot(self.subspan(1, m));
    for (std::size_t i = 0; i < m; ++i) out[1 + m + i] = std::min(own == i ? 0.0 : inf, a[i]);
  };
  stack.push_back(std::move(first));

  LayerProgram relax;
  relax.name = "bellman-ford-relax";
  relax.in_width = 1 + 2 * m;
  relax.message_width = m;
  relax.out_width = 1 + 2 * m;
  relax.reduction = Reduction::Min;
  relax.identity = inf;
  relax.message = [m](std::span<const double> s, std::span<double> msg) {
    for (std::size_t i = 0; i < m; ++i) msg[i] = s[1 + m + i] + s[0];
  };
  relax.update = [m](std::span<const double> self, std::span<const double> a, std::span<double> out) {
    std::copy(self.begin(), self.end(), out.begin());
    for (std::size_t i = 0; i < m; ++i) out[1 + m + i] = std::min(self[1 + m + i], a[i]);
  };
  for (std::size_t l = 1; l < layers; ++l) stack.push_back(relax);
  return stack;
}

/**
 * Floods the landmark-to-landmark matrix through the graph by element-wise min.
 *
 * Landmark u_j contributes column j of D from its own distance vector
 * (D[i][j] = dist_{u_j}[i], the length from u_i to u_j); every other entry
 * starts at `inf`. After the layers each node reached by all landmarks holds
 * the full matrix.
 */
inline LayerStack landmark_matrix_program(std::size_t m, std::size_t n, double inf) {
  if (m == 0) throw Error("landmark_matrix_program: landmark count must be positive");
  const std::size_t layers = std::max<std::size_t>(1, n - 1);
  const std::size_t base = 1 + 2 * m;
  LayerStack stack;
  stack.reserve(layers);

  auto own_column = [m, inf](std::span<const double> s, std::span<double> block) {
    std::fill(block.begin(), block.end(), inf);
    if (auto j = detail::landmark_slot(s.subspan(1, m)))
      for (std::size_t i = 0; i < m; ++i) block[i * m + *j] = s[1 + m + i];
  };

  LayerProgram first;
  first.name = "landmark-matrix-init";
  first.in_width = base;
  first.message_width = m * m;
  first.out_width = base + m * m;
  first.reduction = Reduction::Min;
  first.identity = inf;
  first.message = own_column;
  first.update = [own_column, base, m](std::span<const double> self, std::span<const double> a,
                                       std::span<double> out) {
    std::copy(self.begin(), self.end(), out.begin());
    auto block = out.subspan(base, m * m);
    own_column(self, block);
    for (std::size_t k = 0; k < m * m; ++k) block[k] = std::min(block[k], a[k]);
  };
  stack.push_back(std::move(first));

  LayerProgram flood;
  flood.name = "landmark-matrix-flood";
  flood.in_width = base + m * m;
  flood.message_width = m * m;
  flood.out_width = base + m * m;
  flood.reduction = Reduction::Min;
  flood.identity = inf;
  flood.message = [base, m](std::span<const double> s, std::span<double> msg) {
    std::copy_n(s.begin() + static_cast<std::ptrdiff_t>(base), m * m, msg.begin());
  };
  flood.update = [base, m](std::span<const double> self, std::span<const double> a, std::span<double> out) {
    std::copy(self.begin(), self.end(), out.begin());
    for (std::size_t k = 0; k < m * m; ++k) out[base + k] = std::min(self[base + k], a[k]);
  };
  for (std::size_t l = 1; l < layers; ++l) stack.push_back(flood);
  return stack;
}

/**
 * Symmetrizes a directed landmark matrix for MDS.
 *
 * Pairs with both directions finite are averaged; a pair with one finite
 * direction takes it; pairs unreachable both ways stay at inf.
 */
inline Matrix symmetrize_landmark_matrix(const Matrix& d, double inf) {
  const std::size_t m = d.rows();
  Matrix s(m, m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      const double a = d(i, j);
      const double b = d(j, i);
      const bool fa = a < inf;
      const bool fb = b < inf;
      s(i, j) = fa && fb ? 0.5 * (a + b) : fa ? a : fb ? b : inf;
    }
  return s;
}

// argmin_i dist[i], lowest i on ties.
inline std::size_t nearest_landmark(std::span<const double> dist, double inf) {
  if (dist.empty()) throw Error("node unreachable from all landmarks");
  std::size_t best = 0;
  for (std::size_t i = 1; i < dist.size(); ++i)
    if (dist[i] < dist[best]) best = i;
  if (!(dist[best] < inf)) throw Error("node unreachable from all landmarks");
  return best;
}

/**
 * Coordinates of one node given the MDS rows of the landmarks.
 *
 * A landmark takes its own row; any other node copies the row of its nearest
 * landmark by path length.
 */
inline std::vector<double> final_readout(const Matrix& landmark_coords, std::span<const double> dist,
                                         std::optional<std::size_t> landmark_index, double inf) {
  const std::size_t row = landmark_index ? *landmark_index : nearest_landmark(dist, inf);
  auto r = landmark_coords.row(row);
  return {r.begin(), r.end()};
}

// Single-node form: symmetrize D, run MDS, then read out. Pipelines run the MDS once and share it.
inline std::vector<double> final_readout(const Matrix& landmark_matrix, std::span<const double> dist,
                                         std::optional<std::size_t> landmark_index, std::size_t dim,
                                         double inf) {
  const Matrix coords = classical_mds(symmetrize_landmark_matrix(landmark_matrix, inf), dim);
  return final_readout(coords, dist, landmark_index, inf);
}

}  // namespace latent
