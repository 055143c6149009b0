#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "latent/graph.hpp"
#include "latent/matrix.hpp"
#include "latent/parallel.hpp"

namespace latent {

// Commutative reductions; the only aggregations a layer may use.
enum class Reduction { Sum, Min, Max };

/**
 * One synchronous message-passing layer.
 *
 * Every node u emits message(h_u); node v reduces the messages of its
 * in-neighbors element-wise, starting from `identity`, and then computes
 * update(h_v, a_v). Because the reduction is commutative, the aggregate is a
 * function of the neighbor multiset. Layers that share a `name` are the same
 * program; the engine may stop early inside a trailing run of them.
 */
struct LayerProgram {
  using MessageFn = std::function<void(std::span<const double> sender, std::span<double> message)>;
  using UpdateFn =
      std::function<void(std::span<const double> self, std::span<const double> aggregate, std::span<double> out)>;

  std::string name;
  std::size_t in_width = 0;
  std::size_t message_width = 0;
  std::size_t out_width = 0;
  Reduction reduction = Reduction::Sum;
  double identity = 0.0;
  MessageFn message;
  UpdateFn update;
};

using LayerStack = std::vector<LayerProgram>;

// Called after each layer inside the trailing run of identical layers; true stops execution.
using StopRule = std::function<bool(const Matrix& before, const Matrix& after)>;

struct RunOptions {
  std::size_t threads = 1;
  StopRule stop;
};

struct RunResult {
  FeatureMatrix state;
  std::size_t layers_run = 0;
};

inline bool unchanged(const Matrix& before, const Matrix& after) { return before == after; }

namespace detail {

inline void check_arity(const FeatureMatrix& x0, const LayerStack& layers) {
  std::size_t width = x0.cols();
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& layer = layers[l];
    if (layer.in_width != width)
      throw Error("arity mismatch at layer " + std::to_string(l) + " (" + layer.name + "): expects " +
                  std::to_string(layer.in_width) + " inputs, receives " + std::to_string(width));
    if (!layer.message || !layer.update) throw Error("layer " + std::to_string(l) + " is incomplete");
    width = layer.out_width;
  }
}

inline double reduce(Reduction r, double acc, double x) {
  switch (r) {
    case Reduction::Sum: return acc + x;
    case Reduction::Min: return std::min(acc, x);
    case Reduction::Max: return std::max(acc, x);
  }
  return acc;
}

}  // namespace detail

// One synchronous layer. In-neighbors are reduced in ascending id order.
inline FeatureMatrix step_layer(const DirectedGraph& g, const FeatureMatrix& h, const LayerProgram& layer,
                                std::size_t threads = 1) {
  const std::size_t n = g.node_count();
  if (h.rows() != n) throw Error("state has " + std::to_string(h.rows()) + " rows for " + std::to_string(n) + " nodes");
  Matrix messages(n, layer.message_width);
  parallel_for(n, threads, [&](std::size_t u) { layer.message(h.row(u), messages.row(u)); });

  FeatureMatrix next(n, layer.out_width);
  parallel_for(n, threads, [&](std::size_t v) {
    std::vector<double> agg(layer.message_width, layer.identity);
    for (NodeId u : g.in_neighbors(v)) {
      auto msg = messages.row(u);
      for (std::size_t c = 0; c < agg.size(); ++c) agg[c] = detail::reduce(layer.reduction, agg[c], msg[c]);
    }
    layer.update(h.row(v), agg, next.row(v));
  });
  return next;
}

/**
 * Runs the layers in order from h^(0) = x0 and returns the final states.
 *
 * Arity is validated for the whole stack before any layer executes. When
 * options.stop is set, it is consulted only while every remaining layer is a
 * repeat of the current one, so stopping never skips a different program.
 */
inline RunResult run_layers_until(const DirectedGraph& g, const FeatureMatrix& x0, const LayerStack& layers,
                                  const RunOptions& options) {
  if (x0.rows() != g.node_count()) throw Error("input features must have one row per node");
  detail::check_arity(x0, layers);

  // tail_run[l]: true when layers l..end all share layers[l].name.
  std::vector<char> tail_run(layers.size(), 0);
  for (std::size_t l = layers.size(); l-- > 0;)
    tail_run[l] = (l + 1 == layers.size()) || (tail_run[l + 1] && layers[l + 1].name == layers[l].name);

  RunResult result{x0, 0};
  for (std::size_t l = 0; l < layers.size(); ++l) {
    FeatureMatrix next = step_layer(g, result.state, layers[l], options.threads);
    ++result.layers_run;
    const bool repeated = l > 0 && layers[l - 1].name == layers[l].name;
    const bool stop = options.stop && repeated && tail_run[l] && options.stop(result.state, next);
    result.state = std::move(next);
    if (stop) break;
  }
  return result;
}

inline FeatureMatrix run_layers(const DirectedGraph& g, const FeatureMatrix& x0, const LayerStack& layers) {
  return run_layers_until(g, x0, layers, {}).state;
}

}  // namespace latent
