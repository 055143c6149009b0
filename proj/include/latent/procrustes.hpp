#pragma once

#include <numeric>

#include "latent/matrix.hpp"
#include "latent/numerics.hpp"

namespace latent {

struct AlignmentResult {
  Matrix rotation;      // d x d orthogonal; reflections allowed
  double scale = 1.0;
  double residual = 0.0;  // (1/n) ||C X - s C Y P||_F^2
};

namespace detail {

inline void require_same_shape(const Matrix& x, const Matrix& y) {
  if (x.rows() != y.rows() || x.cols() != y.cols())
    throw Error("procrustes: shape mismatch (" + std::to_string(x.rows()) + "x" +
                std::to_string(x.cols()) + " vs " + std::to_string(y.rows()) + "x" +
                std::to_string(y.cols()) + ")");
  if (x.rows() == 0) throw Error("procrustes: empty configuration");
}

struct PolarFactor {
  Matrix rotation;
  double trace = 0.0;  // sum of singular values of (C Y)^T (C X)
};

inline PolarFactor polar_factor(const Matrix& cx, const Matrix& cy) {
  const auto svd = svd_small(transpose(cy) * cx);
  PolarFactor pf;
  pf.rotation = svd.u * transpose(svd.v);
  pf.trace = std::accumulate(svd.singular_values.begin(), svd.singular_values.end(), 0.0);
  return pf;
}

inline double mean_sq_residual(const Matrix& cx, const Matrix& aligned) {
  return frobenius_sq(cx - aligned) / static_cast<double>(cx.rows());
}

}  // namespace detail

// Orthogonal P minimizing (1/n)||C X - C Y P||_F^2; P acts on the second argument.
inline AlignmentResult procrustes_align(const Matrix& x, const Matrix& y) {
  detail::require_same_shape(x, y);
  const Matrix cx = center_columns(x);
  const Matrix cy = center_columns(y);
  auto pf = detail::polar_factor(cx, cy);
  AlignmentResult r;
  r.residual = detail::mean_sq_residual(cx, cy * pf.rotation);
  r.rotation = std::move(pf.rotation);
  return r;
}

// Orthogonal Procrustes distance between two configurations.
inline double d_g(const Matrix& x, const Matrix& y) { return procrustes_align(x, y).residual; }

// Adds a nonnegative global scale on Y: s = sum(sigma) / ||C Y||_F^2.
inline AlignmentResult scaled_procrustes(const Matrix& x, const Matrix& y) {
  detail::require_same_shape(x, y);
  const Matrix cx = center_columns(x);
  const Matrix cy = center_columns(y);
  const double var_y = frobenius_sq(cy);
  if (!(var_y > 0.0)) throw Error("degenerate reference: second configuration has zero variance");
  auto pf = detail::polar_factor(cx, cy);
  AlignmentResult r;
  r.scale = pf.trace / var_y;
  r.residual = detail::mean_sq_residual(cx, r.scale * (cy * pf.rotation));
  r.rotation = std::move(pf.rotation);
  return r;
}

/**
 * Rigid map fitted on a subset of rows and applied to every row.
 *
 * apply(y) = (y - source_mean) * scale * P + target_mean, where the means are
 * those of the rows used for fitting.
 */
struct RigidTransform {
  Matrix rotation;
  double scale = 1.0;
  std::vector<double> source_mean;
  std::vector<double> target_mean;

  Matrix apply(const Matrix& y) const {
    Matrix shifted = y;
    for (std::size_t i = 0; i < shifted.rows(); ++i)
      for (std::size_t j = 0; j < shifted.cols(); ++j) shifted(i, j) -= source_mean[j];
    Matrix out = scale * (shifted * rotation);
    for (std::size_t i = 0; i < out.rows(); ++i)
      for (std::size_t j = 0; j < out.cols(); ++j) out(i, j) += target_mean[j];
    return out;
  }
};

// Fit Y -> X on the rows in ids (with a free scale when with_scale is set).
inline RigidTransform fit_rigid(const Matrix& x, const Matrix& y, std::span<const std::size_t> ids,
                                bool with_scale) {
  const Matrix xs = select_rows(x, ids);
  const Matrix ys = select_rows(y, ids);
  const auto al = with_scale ? scaled_procrustes(xs, ys) : procrustes_align(xs, ys);
  return {al.rotation, al.scale, column_means(ys), column_means(xs)};
}

// Mean squared row distance over ids.
inline double mean_sq_error(const Matrix& x, const Matrix& y, std::span<const std::size_t> ids) {
  if (ids.empty()) return 0.0;
  double s = 0.0;
  for (std::size_t i : ids)
    for (std::size_t j = 0; j < x.cols(); ++j) {
      const double diff = x(i, j) - y(i, j);
      s += diff * diff;
    }
  return s / static_cast<double>(ids.size());
}

}  // namespace latent
