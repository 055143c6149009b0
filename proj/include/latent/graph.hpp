#pragma once

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "latent/matrix.hpp"

namespace latent {

using NodeId = std::size_t;

struct Arc {
  NodeId tail;
  NodeId head;
  friend auto operator<=>(const Arc&, const Arc&) = default;
};

/**
 * Unweighted directed graph in CSR form with both adjacency directions.
 *
 * Out-lists and in-lists are sorted by node id, so every traversal of the
 * graph is deterministic. Instances are immutable once built.
 */
class DirectedGraph {
 public:
  DirectedGraph() = default;

  std::size_t node_count() const noexcept { return n_; }
  std::size_t arc_count() const noexcept { return out_targets_.size(); }

  std::span<const NodeId> out_neighbors(NodeId v) const {
    return {out_targets_.data() + out_offsets_[v], out_offsets_[v + 1] - out_offsets_[v]};
  }
  // Tails u of arcs u -> v.
  std::span<const NodeId> in_neighbors(NodeId v) const {
    return {in_sources_.data() + in_offsets_[v], in_offsets_[v + 1] - in_offsets_[v]};
  }

  std::size_t out_degree(NodeId v) const { return out_offsets_[v + 1] - out_offsets_[v]; }
  std::size_t in_degree(NodeId v) const { return in_offsets_[v + 1] - in_offsets_[v]; }

  std::vector<Arc> arcs() const {
    std::vector<Arc> out;
    out.reserve(arc_count());
    for (NodeId v = 0; v < n_; ++v)
      for (NodeId u : out_neighbors(v)) out.push_back({v, u});
    return out;
  }

  // Reverses every arc.
  DirectedGraph transpose() const {
    DirectedGraph t;
    t.n_ = n_;
    t.out_offsets_ = in_offsets_;
    t.out_targets_ = in_sources_;
    t.in_offsets_ = out_offsets_;
    t.in_sources_ = out_targets_;
    return t;
  }

  friend bool operator==(const DirectedGraph&, const DirectedGraph&) = default;

  friend DirectedGraph build_graph(std::size_t n, std::span<const Arc> arcs);

 private:
  std::size_t n_ = 0;
  std::vector<std::size_t> out_offsets_{0};
  std::vector<NodeId> out_targets_;
  std::vector<std::size_t> in_offsets_{0};
  std::vector<NodeId> in_sources_;
};

namespace detail {

inline void fill_csr(std::size_t n, const std::vector<Arc>& sorted, bool by_tail,
                     std::vector<std::size_t>& offsets, std::vector<NodeId>& targets) {
  offsets.assign(n + 1, 0);
  targets.resize(sorted.size());
  for (const Arc& a : sorted) ++offsets[(by_tail ? a.tail : a.head) + 1];
  std::partial_sum(offsets.begin(), offsets.end(), offsets.begin());
  std::vector<std::size_t> cursor(offsets.begin(), offsets.end() - 1);
  for (const Arc& a : sorted) {
    const NodeId key = by_tail ? a.tail : a.head;
    targets[cursor[key]++] = by_tail ? a.head : a.tail;
  }
}

}  // namespace detail

// Duplicate arcs collapse to one; self-loops and out-of-range endpoints throw.
inline DirectedGraph build_graph(std::size_t n, std::span<const Arc> arcs) {
  if (n == 0) throw Error("graph must have at least one node");
  std::vector<Arc> sorted(arcs.begin(), arcs.end());
  for (const Arc& a : sorted) {
    if (a.tail >= n || a.head >= n)
      throw Error("endpoint out of range: arc (" + std::to_string(a.tail) + ", " +
                  std::to_string(a.head) + ") with n = " + std::to_string(n));
    if (a.tail == a.head) throw Error("self-loop at node " + std::to_string(a.tail));
  }
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());

  DirectedGraph g;
  g.n_ = n;
  detail::fill_csr(n, sorted, true, g.out_offsets_, g.out_targets_);
  // Sorting by (tail, head) and scattering by head keeps every in-list sorted by tail.
  detail::fill_csr(n, sorted, false, g.in_offsets_, g.in_sources_);
  return g;
}

inline DirectedGraph build_graph(std::size_t n, std::initializer_list<Arc> arcs) {
  return build_graph(n, std::span<const Arc>(arcs.begin(), arcs.size()));
}

// True iff the undirected symmetrization has a single component.
inline bool is_weakly_connected(const DirectedGraph& g) {
  const std::size_t n = g.node_count();
  if (n == 0) return false;
  std::vector<char> seen(n, 0);
  std::vector<NodeId> stack{0};
  seen[0] = 1;
  std::size_t visited = 1;
  while (!stack.empty()) {
    const NodeId v = stack.back();
    stack.pop_back();
    auto visit = [&](NodeId u) {
      if (!seen[u]) {
        seen[u] = 1;
        ++visited;
        stack.push_back(u);
      }
    };
    for (NodeId u : g.out_neighbors(v)) visit(u);
    for (NodeId u : g.in_neighbors(v)) visit(u);
  }
  return visited == n;
}

// Every node reaches every other node along arcs.
inline bool is_strongly_connected(const DirectedGraph& g) {
  const std::size_t n = g.node_count();
  auto reaches_all = [n](auto&& neighbors) {
    std::vector<char> seen(n, 0);
    std::vector<NodeId> stack{0};
    seen[0] = 1;
    std::size_t visited = 1;
    while (!stack.empty()) {
      const NodeId v = stack.back();
      stack.pop_back();
      for (NodeId u : neighbors(v))
        if (!seen[u]) {
          seen[u] = 1;
          ++visited;
          stack.push_back(u);
        }
    }
    return visited == n;
  };
  return reaches_all([&](NodeId v) { return g.out_neighbors(v); }) &&
         reaches_all([&](NodeId v) { return g.in_neighbors(v); });
}

// Node v of the input becomes node perm[v] of the output.
inline DirectedGraph relabel(const DirectedGraph& g, std::span<const NodeId> perm) {
  if (perm.size() != g.node_count()) throw Error("permutation size differs from node count");
  std::vector<Arc> arcs = g.arcs();
  for (Arc& a : arcs) a = {perm[a.tail], perm[a.head]};
  return build_graph(g.node_count(), arcs);
}

// Row v of the input becomes row perm[v] of the output.
inline Matrix relabel_rows(const Matrix& x, std::span<const NodeId> perm) {
  Matrix out(x.rows(), x.cols());
  for (std::size_t v = 0; v < x.rows(); ++v) {
    auto src = x.row(v);
    std::copy(src.begin(), src.end(), out.row(perm[v]).begin());
  }
  return out;
}

}  // namespace latent
