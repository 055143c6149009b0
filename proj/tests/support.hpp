#pragma once

// Independent reference implementations and random inputs for the tests.
// Nothing here calls the library routine it is meant to check.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "latent/graph.hpp"
#include "latent/matrix.hpp"

namespace support {

using latent::Arc;
using latent::DirectedGraph;
using latent::Matrix;

inline Matrix random_matrix(std::size_t rows, std::size_t cols, std::mt19937_64& rng, double sd = 1.0) {
  std::normal_distribution<double> g(0.0, sd);
  Matrix m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) m(r, c) = g(rng);
  return m;
}

// Random orthogonal matrix by Gram-Schmidt on a Gaussian matrix; a reflection half the time.
inline Matrix random_orthogonal(std::size_t d, std::mt19937_64& rng) {
  Matrix q = random_matrix(d, d, rng);
  for (std::size_t c = 0; c < d; ++c) {
    for (std::size_t p = 0; p < c; ++p) {
      double dot = 0.0;
      for (std::size_t r = 0; r < d; ++r) dot += q(r, c) * q(r, p);
      for (std::size_t r = 0; r < d; ++r) q(r, c) -= dot * q(r, p);
    }
    double norm = 0.0;
    for (std::size_t r = 0; r < d; ++r) norm += q(r, c) * q(r, c);
    norm = std::sqrt(norm);
    for (std::size_t r = 0; r < d; ++r) q(r, c) /= norm;
  }
  return q;
}

inline Matrix rotation2(double theta) {
  return Matrix::from_rows({{std::cos(theta), -std::sin(theta)}, {std::sin(theta), std::cos(theta)}});
}

// Adds t to every row.
inline Matrix translate(Matrix x, const std::vector<double>& t) {
  for (std::size_t r = 0; r < x.rows(); ++r)
    for (std::size_t c = 0; c < x.cols(); ++c) x(r, c) += t[c];
  return x;
}

/**
 * Random strongly connected digraph: a Hamiltonian cycle through a random
 * order plus `extra` random arcs.
 */
inline DirectedGraph random_strong_graph(std::size_t n, std::size_t extra, std::mt19937_64& rng) {
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<Arc> arcs;
  for (std::size_t i = 0; i < n; ++i) arcs.push_back({order[i], order[(i + 1) % n]});
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  for (std::size_t e = 0; e < extra; ++e) {
    const auto a = pick(rng), b = pick(rng);
    if (a != b) arcs.push_back({a, b});
  }
  return latent::build_graph(n, arcs);
}

/**
 * Random weakly connected digraph with every out-degree >= 1 that is usually
 * not strongly connected: a random tree oriented child -> parent (root gets
 * an arc to a child), plus `extra` random arcs.
 */
inline DirectedGraph random_weak_graph(std::size_t n, std::size_t extra, std::mt19937_64& rng) {
  std::vector<Arc> arcs;
  for (std::size_t v = 1; v < n; ++v) {
    std::uniform_int_distribution<std::size_t> parent(0, v - 1);
    arcs.push_back({v, parent(rng)});
  }
  arcs.push_back({0, 1});
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  for (std::size_t e = 0; e < extra; ++e) {
    const auto a = pick(rng), b = pick(rng);
    if (a != b) arcs.push_back({a, b});
  }
  return latent::build_graph(n, arcs);
}

inline DirectedGraph undirected(std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& edges) {
  std::vector<Arc> arcs;
  for (auto [a, b] : edges) {
    arcs.push_back({a, b});
    arcs.push_back({b, a});
  }
  return latent::build_graph(n, arcs);
}

/**
 * n * pi for the simple random walk, from the linear system
 * pi_v = sum_{u -> v} pi_u / d_u with sum(pi) = 1, solved by Gaussian
 * elimination with partial pivoting in long double.
 */
inline std::vector<double> stationary_by_solve(const DirectedGraph& g) {
  const std::size_t n = g.node_count();
  std::vector<std::vector<long double>> a(n, std::vector<long double>(n + 1, 0.0L));
  for (std::size_t v = 0; v < n; ++v) {
    a[v][v] -= 1.0L;
    for (auto u : g.in_neighbors(v)) a[v][u] += 1.0L / static_cast<long double>(g.out_degree(u));
  }
  // One equation is redundant; replace the last with the normalization.
  for (std::size_t c = 0; c < n; ++c) a[n - 1][c] = 1.0L;
  a[n - 1][n] = 1.0L;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::fabs(a[r][col]) > std::fabs(a[piv][col])) piv = r;
    std::swap(a[piv], a[col]);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      const long double f = a[r][col] / a[col][col];
      if (f == 0.0L) continue;
      for (std::size_t c = col; c <= n; ++c) a[r][c] -= f * a[col][c];
    }
  }
  std::vector<double> out(n);
  for (std::size_t v = 0; v < n; ++v) out[v] = static_cast<double>(static_cast<long double>(n) * a[v][n] / a[v][v]);
  return out;
}

/**
 * All-pairs shortest paths by Floyd-Warshall with arc (s, t) of length
 * lengths[s]; result (a, b) is the length from a to b, `inf` if none.
 */
inline Matrix floyd_warshall(const DirectedGraph& g, const std::vector<double>& lengths, double inf) {
  const std::size_t n = g.node_count();
  Matrix d(n, n, inf);
  for (std::size_t v = 0; v < n; ++v) {
    d(v, v) = 0.0;
    for (auto t : g.out_neighbors(v)) d(v, t) = std::min(d(v, t), lengths[v]);
  }
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i) {
      if (d(i, k) >= inf) continue;
      for (std::size_t j = 0; j < n; ++j)
        if (d(k, j) < inf) d(i, j) = std::min(d(i, j), d(i, k) + d(k, j));
    }
  return d;
}

/**
 * Orthogonal Procrustes residual in two dimensions by brute force: every
 * rotation angle on a grid of the given step, with and without a reflection.
 * (1/n) ||CX - CY P||^2 = (|CX|^2 + |CY|^2 - 2 <CY P, CX>) / n.
 */
inline double procrustes_grid_2d(const Matrix& x, const Matrix& y, double step = 1e-4) {
  const std::size_t n = x.rows();
  double mx[2] = {0, 0}, my[2] = {0, 0};
  for (std::size_t r = 0; r < n; ++r)
    for (int c = 0; c < 2; ++c) {
      mx[c] += x(r, c) / static_cast<double>(n);
      my[c] += y(r, c) / static_cast<double>(n);
    }
  double sxx = 0.0, syy = 0.0, m[2][2] = {{0, 0}, {0, 0}};  // m = (CY)^T CX
  for (std::size_t r = 0; r < n; ++r) {
    const double cx[2] = {x(r, 0) - mx[0], x(r, 1) - mx[1]};
    const double cy[2] = {y(r, 0) - my[0], y(r, 1) - my[1]};
    sxx += cx[0] * cx[0] + cx[1] * cx[1];
    syy += cy[0] * cy[0] + cy[1] * cy[1];
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) m[a][b] += cy[a] * cx[b];
  }
  double best_inner = -1e300;
  const auto steps = static_cast<long>(std::ceil(2.0 * std::numbers::pi / step));
  for (long i = 0; i < steps; ++i) {
    const double t = static_cast<double>(i) * step;
    const double c = std::cos(t), s = std::sin(t);
    // rotation [[c, -s], [s, c]] and reflection [[c, s], [s, -c]]
    const double rot = c * m[0][0] - s * m[0][1] + s * m[1][0] + c * m[1][1];
    const double ref = c * m[0][0] + s * m[0][1] + s * m[1][0] - c * m[1][1];
    best_inner = std::max({best_inner, rot, ref});
  }
  return (sxx + syy - 2.0 * best_inner) / static_cast<double>(n);
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

inline double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const double n = static_cast<double>(a.size());
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i] / n;
    mb += b[i] / n;
  }
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

inline std::vector<std::size_t> random_permutation(std::size_t n, std::mt19937_64& rng) {
  std::vector<std::size_t> p(n);
  for (std::size_t i = 0; i < n; ++i) p[i] = i;
  std::shuffle(p.begin(), p.end(), rng);
  return p;
}

}  // namespace support
