#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <set>
#include <utility>
#include <vector>

#include "latent/matrix.hpp"
#include "latent/procrustes.hpp"

namespace latent {

// kappa as a function of graph size: a constant, or a * n^b.
struct KappaModel {
  enum class Mode { Fixed, PowerLaw };

  Mode mode = Mode::Fixed;
  double kappa = 1.0;
  double a = 1.0;
  double b = 0.0;

  static KappaModel fixed(double kappa) {
    if (!(kappa > 0.0)) throw Error("kappa must be positive");
    return {Mode::Fixed, kappa, 1.0, 0.0};
  }
  static KappaModel power_law(double a, double b) {
    if (!(a > 0.0)) throw Error("power-law kappa needs a > 0");
    return {Mode::PowerLaw, 1.0, a, b};
  }

  double operator()(std::size_t n) const {
    return mode == Mode::Fixed ? kappa : a * std::pow(static_cast<double>(n), b);
  }
};

/**
 * Scale that best maps the kappa = 1 embedding of the training nodes onto
 * their true coordinates. `truth` holds one row per entry of train_ids.
 *
 * The recovered embedding is homogeneous of degree one in kappa, so this
 * minimizes the training Procrustes loss over kappa exactly.
 */
inline double fit_kappa_transductive(const Matrix& unit_embedding, const Matrix& truth,
                                     std::span<const std::size_t> train_ids) {
  if (truth.rows() != train_ids.size()) throw Error("fit_kappa_transductive: one truth row per training node");
  if (train_ids.size() < unit_embedding.cols() + 1)
    throw Error("fit_kappa_transductive: need at least dim + 1 training nodes");
  const Matrix unit_rows = select_rows(unit_embedding, train_ids);
  const double s = scaled_procrustes(truth, unit_rows).scale;
  if (!(s > 0.0)) throw Error("fit_kappa_transductive: degenerate alignment (scale " + std::to_string(s) + ")");
  return s;
}

// Least-squares line through (ln n, ln kappa).
inline KappaModel fit_kappa_curve(std::span<const std::pair<std::size_t, double>> samples) {
  std::set<std::size_t> sizes;
  for (const auto& [n, kappa] : samples) {
    if (!(kappa > 0.0)) throw Error("fit_kappa_curve: kappa samples must be positive");
    if (n == 0) throw Error("fit_kappa_curve: sizes must be positive");
    sizes.insert(n);
  }
  if (sizes.size() < 2) throw Error("underdetermined: kappa curve needs at least two distinct sizes");

  // Sorted copy makes the sums independent of sample order.
  std::vector<std::pair<double, double>> pts;
  for (const auto& [n, kappa] : samples) pts.emplace_back(std::log(static_cast<double>(n)), std::log(kappa));
  std::sort(pts.begin(), pts.end());
  const double count = static_cast<double>(pts.size());
  double mx = 0.0, my = 0.0;
  for (const auto& [x, y] : pts) {
    mx += x;
    my += y;
  }
  mx /= count;
  my /= count;
  double sxx = 0.0, sxy = 0.0;
  for (const auto& [x, y] : pts) {
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (y - my);
  }
  const double b = sxy / sxx;
  return KappaModel::power_law(std::exp(my - b * mx), b);
}

}  // namespace latent
