#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "latent/calibration.hpp"
#include "latent/pipeline.hpp"
#include "latent/procrustes.hpp"
#include "latent/synthetic.hpp"

namespace latent {

inline constexpr double kTrainFraction = 0.7;

struct Split {
  std::vector<std::size_t> train;  // sorted
  std::vector<std::size_t> test;   // sorted
};

// Uniform shuffle; the first round(fraction * n) nodes train.
inline Split split_nodes(std::size_t n, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw Error("train fraction must lie in (0, 1)");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  const auto cut = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(n)));
  Split s;
  s.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(cut));
  s.test.assign(order.begin() + static_cast<std::ptrdiff_t>(cut), order.end());
  std::sort(s.train.begin(), s.train.end());
  std::sort(s.test.begin(), s.test.end());
  return s;
}

// A fixed number of training nodes per class; everything else is test.
inline Split split_per_class(std::span<const int> labels, std::size_t per_class, std::uint64_t seed) {
  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t v = 0; v < labels.size(); ++v) by_class[labels[v]].push_back(v);
  std::mt19937_64 rng(seed);
  std::vector<char> is_train(labels.size(), 0);
  for (auto& [label, nodes] : by_class) {
    std::shuffle(nodes.begin(), nodes.end(), rng);
    for (std::size_t i = 0; i < std::min(per_class, nodes.size()); ++i) is_train[nodes[i]] = 1;
  }
  Split s;
  for (std::size_t v = 0; v < labels.size(); ++v) (is_train[v] ? s.train : s.test).push_back(v);
  return s;
}

struct LogisticHyper {
  double learning_rate = 0.1;
  std::size_t epochs = 500;
  double l2 = 1e-4;
};

struct LogisticFit {
  double accuracy = 0.0;
  std::vector<double> loss;  // training objective before each epoch and after the last
};

/**
 * Multinomial logistic regression by full-batch gradient descent.
 *
 * Columns are standardized with training statistics (constant columns become
 * zero). Weights start at zero; the objective is mean cross-entropy plus
 * (l2 / 2) ||W||^2 on the weights (bias unpenalized). Ties in prediction go
 * to the lowest class id.
 */
inline LogisticFit logistic_fit(const FeatureMatrix& features, std::span<const int> labels,
                                std::span<const std::size_t> train_ids, std::span<const std::size_t> test_ids,
                                const LogisticHyper& hyper = {}) {
  if (train_ids.empty() || test_ids.empty()) throw Error("logistic_eval: empty train or test set");
  if (labels.size() != features.rows()) throw Error("logistic_eval: one label per row required");
  const std::size_t p = features.cols();
  int max_label = 0;
  for (int y : labels) {
    if (y < 0) throw Error("logistic_eval: labels must be nonnegative");
    max_label = std::max(max_label, y);
  }
  const std::size_t classes = static_cast<std::size_t>(max_label) + 1;

  std::vector<double> mean(p, 0.0), inv_sd(p, 0.0);
  for (std::size_t i : train_ids)
    for (std::size_t j = 0; j < p; ++j) mean[j] += features(i, j);
  for (double& m : mean) m /= static_cast<double>(train_ids.size());
  for (std::size_t j = 0; j < p; ++j) {
    double var = 0.0;
    for (std::size_t i : train_ids) var += (features(i, j) - mean[j]) * (features(i, j) - mean[j]);
    var /= static_cast<double>(train_ids.size());
    inv_sd[j] = var > 0.0 ? 1.0 / std::sqrt(var) : 0.0;
  }
  auto standardized = [&](std::size_t i, std::size_t j) { return (features(i, j) - mean[j]) * inv_sd[j]; };

  Matrix w(p, classes);
  std::vector<double> bias(classes, 0.0);
  std::vector<double> scores(classes);

  auto softmax_scores = [&](std::size_t i) {
    for (std::size_t c = 0; c < classes; ++c) {
      double s = bias[c];
      for (std::size_t j = 0; j < p; ++j) s += standardized(i, j) * w(j, c);
      scores[c] = s;
    }
  };
  auto objective_and_gradient = [&](Matrix* gw, std::vector<double>* gb) {
    double loss = 0.0;
    const double inv_n = 1.0 / static_cast<double>(train_ids.size());
    for (std::size_t i : train_ids) {
      softmax_scores(i);
      const double top = *std::max_element(scores.begin(), scores.end());
      double z = 0.0;
      for (double s : scores) z += std::exp(s - top);
      const auto y = static_cast<std::size_t>(labels[i]);
      loss += (std::log(z) + top - scores[y]) * inv_n;
      if (!gw) continue;
      for (std::size_t c = 0; c < classes; ++c) {
        const double resid = (std::exp(scores[c] - top) / z - (c == y ? 1.0 : 0.0)) * inv_n;
        (*gb)[c] += resid;
        for (std::size_t j = 0; j < p; ++j) (*gw)(j, c) += resid * standardized(i, j);
      }
    }
    loss += 0.5 * hyper.l2 * frobenius_sq(w);
    if (gw)
      for (std::size_t j = 0; j < p; ++j)
        for (std::size_t c = 0; c < classes; ++c) (*gw)(j, c) += hyper.l2 * w(j, c);
    return loss;
  };

  LogisticFit fit;
  for (std::size_t epoch = 0; epoch < hyper.epochs; ++epoch) {
    Matrix gw(p, classes);
    std::vector<double> gb(classes, 0.0);
    fit.loss.push_back(objective_and_gradient(&gw, &gb));
    for (std::size_t j = 0; j < p; ++j)
      for (std::size_t c = 0; c < classes; ++c) w(j, c) -= hyper.learning_rate * gw(j, c);
    for (std::size_t c = 0; c < classes; ++c) bias[c] -= hyper.learning_rate * gb[c];
  }
  fit.loss.push_back(objective_and_gradient(nullptr, nullptr));

  std::size_t correct = 0;
  for (std::size_t i : test_ids) {
    softmax_scores(i);
    const auto pred = static_cast<int>(std::max_element(scores.begin(), scores.end()) - scores.begin());
    correct += pred == labels[i];
  }
  fit.accuracy = static_cast<double>(correct) / static_cast<double>(test_ids.size());
  return fit;
}

inline double logistic_eval(const FeatureMatrix& features, std::span<const int> labels,
                            std::span<const std::size_t> train_ids, std::span<const std::size_t> test_ids,
                            const LogisticHyper& hyper = {}) {
  return logistic_fit(features, labels, train_ids, test_ids, hyper).accuracy;
}

// Noise that keeps the two-moon kNN graph connected at the sizes used in experiments.
inline constexpr double kDefaultNoise = 0.15;

// Generator settings for one synthetic graph. k unset means paper_k(n).
struct DatasetSpec {
  HiddenKind kind = HiddenKind::TwoMoon;
  std::size_t n = 1000;
  std::size_t d = 2;
  double noise = kDefaultNoise;
  std::uint64_t seed = 1;
  std::optional<std::size_t> k;

  std::size_t resolved_k() const { return k ? *k : paper_k(n); }
};

struct Dataset {
  HiddenSample hidden;
  DirectedGraph graph;
  std::size_t k = 0;
};

inline Dataset generate_dataset(const DatasetSpec& spec, std::size_t threads = 1) {
  Dataset ds;
  ds.hidden = sample_hidden(spec.kind, spec.n, spec.d, spec.noise, spec.seed);
  ds.k = spec.resolved_k();
  ds.graph = build_knn_graph(ds.hidden.z, ds.k, threads);
  return ds;
}

// (1/n) ||C Z||_F^2 over the given rows.
inline double centered_variance(const Matrix& z, std::span<const std::size_t> ids) {
  const Matrix rows = select_rows(z, ids);
  return frobenius_sq(center_columns(rows)) / static_cast<double>(rows.rows());
}

struct RunRecord {
  std::string role;  // "transductive", "train", or "test"
  std::size_t n = 0;
  std::size_t k = 0;
  std::size_t m = 0;
  std::uint64_t seed = 0;
  double kappa = 0.0;
  std::optional<double> d_g_train;
  std::optional<double> d_g_test;
  std::optional<double> d_g_all;
  std::optional<double> variance_test;  // centered variance of the truth on the test nodes
  std::optional<double> accuracy_recovered;
  std::optional<double> accuracy_baseline;
  std::size_t stationary_layers = 0;
  double wall_seconds = 0.0;
};

struct ExperimentReport {
  std::string setting;  // "transductive" or "inductive"
  DatasetSpec dataset;
  RecoveryConfig config;
  std::string alignment;
  LogisticHyper classifier;
  std::vector<RunRecord> runs;
  std::optional<KappaModel> kappa_curve;
};

namespace detail {

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace detail

/**
 * Single-graph experiment: recover at kappa = 1, fit kappa and a rigid map on
 * the 70% training split, and report mean squared error of the mapped
 * coordinates on train, test, and all nodes. With labels, also compares a
 * logistic classifier on the recovered coordinates against one on [d_v, n].
 */
inline ExperimentReport run_transductive(const DatasetSpec& spec, const RecoveryConfig& cfg, std::uint64_t split_seed,
                                         const LogisticHyper& hyper = {}) {
  const auto t0 = std::chrono::steady_clock::now();
  const Dataset ds = generate_dataset(spec, cfg.threads);
  RecoveryConfig unit_cfg = cfg;
  unit_cfg.kappa_model = KappaModel::fixed(1.0);
  const Recovery rec = recover_features(ds.graph, unit_cfg);
  const Split split = split_nodes(spec.n, kTrainFraction, split_seed);
  const Matrix& z = ds.hidden.z;

  const double kappa = fit_kappa_transductive(rec.coordinates, select_rows(z, split.train), split.train);
  const RigidTransform map = fit_rigid(z, rec.coordinates, split.train, true);
  const Matrix aligned = map.apply(rec.coordinates);
  std::vector<std::size_t> all(spec.n);
  std::iota(all.begin(), all.end(), 0);

  RunRecord run;
  run.role = "transductive";
  run.n = spec.n;
  run.k = ds.k;
  run.m = rec.landmarks.size();
  run.seed = spec.seed;
  run.kappa = kappa;
  run.d_g_train = mean_sq_error(z, aligned, split.train);
  run.d_g_test = mean_sq_error(z, aligned, split.test);
  run.d_g_all = mean_sq_error(z, aligned, all);
  run.variance_test = centered_variance(z, split.test);
  run.stationary_layers = rec.diagnostics.stationary_layers;
  if (!ds.hidden.labels.empty()) {
    run.accuracy_recovered =
        logistic_eval(kappa * rec.coordinates, ds.hidden.labels, split.train, split.test, hyper);
    run.accuracy_baseline =
        logistic_eval(make_node_features(ds.graph, {}), ds.hidden.labels, split.train, split.test, hyper);
  }
  run.wall_seconds = detail::seconds_since(t0);

  ExperimentReport report;
  report.setting = "transductive";
  report.dataset = spec;
  report.config = cfg;
  report.alignment = "scaled rigid map fitted on training nodes only, applied to all nodes";
  report.classifier = hyper;
  report.runs.push_back(std::move(run));
  return report;
}

/**
 * Size-extrapolation experiment. For every seed: fit kappa per training size
 * against full truth, fit the power law kappa(n), recover a larger test graph
 * with the extrapolated kappa, and score it with an unscaled Procrustes
 * alignment on the full test truth.
 */
inline ExperimentReport run_inductive(std::span<const std::size_t> train_sizes, std::size_t test_size,
                                      const DatasetSpec& spec_template, const RecoveryConfig& cfg,
                                      std::span<const std::uint64_t> seeds) {
  if (train_sizes.size() < 2) throw Error("inductive setting needs at least two training sizes");
  ExperimentReport report;
  report.setting = "inductive";
  report.dataset = spec_template;
  report.config = cfg;
  report.alignment = "train graphs: scaled alignment on full truth; test graph: rotation-only alignment on full truth";

  std::vector<std::pair<std::size_t, double>> samples;
  RecoveryConfig unit_cfg = cfg;
  unit_cfg.kappa_model = KappaModel::fixed(1.0);
  for (std::uint64_t seed : seeds) {
    for (std::size_t n : train_sizes) {
      const auto t0 = std::chrono::steady_clock::now();
      DatasetSpec spec = spec_template;
      spec.n = n;
      spec.seed = seed;
      const Dataset ds = generate_dataset(spec, cfg.threads);
      unit_cfg.seed = seed;
      const Recovery rec = recover_features(ds.graph, unit_cfg);
      const auto al = scaled_procrustes(ds.hidden.z, rec.coordinates);
      samples.emplace_back(n, al.scale);

      RunRecord run;
      run.role = "train";
      run.n = n;
      run.k = ds.k;
      run.m = rec.landmarks.size();
      run.seed = seed;
      run.kappa = al.scale;
      run.d_g_all = al.residual;
      run.stationary_layers = rec.diagnostics.stationary_layers;
      run.wall_seconds = detail::seconds_since(t0);
      report.runs.push_back(std::move(run));
    }
  }
  const KappaModel curve = fit_kappa_curve(samples);
  report.kappa_curve = curve;

  for (std::uint64_t seed : seeds) {
    const auto t0 = std::chrono::steady_clock::now();
    DatasetSpec spec = spec_template;
    spec.n = test_size;
    spec.seed = seed;
    const Dataset ds = generate_dataset(spec, cfg.threads);
    RecoveryConfig test_cfg = cfg;
    test_cfg.kappa_model = curve;
    test_cfg.seed = seed;
    const Recovery rec = recover_features(ds.graph, test_cfg);

    std::vector<std::size_t> all(test_size);
    std::iota(all.begin(), all.end(), 0);
    RunRecord run;
    run.role = "test";
    run.n = test_size;
    run.k = ds.k;
    run.m = rec.landmarks.size();
    run.seed = seed;
    run.kappa = rec.diagnostics.kappa;
    run.d_g_test = d_g(ds.hidden.z, rec.coordinates);
    run.variance_test = centered_variance(ds.hidden.z, all);
    run.stationary_layers = rec.diagnostics.stationary_layers;
    run.wall_seconds = detail::seconds_since(t0);
    report.runs.push_back(std::move(run));
  }
  return report;
}

}  // namespace latent
