#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <vector>

#include "latent/matrix.hpp"

namespace latent {

struct SymEigResult {
  std::vector<double> eigenvalues;  // descending
  Matrix eigenvectors;              // column i pairs with eigenvalues[i]
};

namespace detail {

inline void require_square(const Matrix& a, const char* what) {
  if (a.rows() != a.cols()) throw Error(std::string(what) + ": matrix is not square");
}

// Flip each column so that its largest-magnitude entry (first one on ties) is positive.
inline void fix_column_signs(Matrix& v) {
  for (std::size_t j = 0; j < v.cols(); ++j) {
    std::size_t best = 0;
    double best_abs = -1.0;
    for (std::size_t i = 0; i < v.rows(); ++i) {
      const double a = std::abs(v(i, j));
      if (a > best_abs) {
        best_abs = a;
        best = i;
      }
    }
    if (v.rows() > 0 && v(best, j) < 0.0)
      for (std::size_t i = 0; i < v.rows(); ++i) v(i, j) = -v(i, j);
  }
}

}  // namespace detail

/**
 * Full eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
 *
 * Sweeps visit pairs (p, q) in row-major order, so results are reproducible
 * bit for bit. Input must be symmetric to 1e-12 relative to its largest entry.
 */
inline SymEigResult sym_eig(const Matrix& input) {
  detail::require_square(input, "sym_eig");
  const std::size_t n = input.rows();
  const double scale = std::max(1.0, max_abs(input));
  Matrix a = input;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      if (std::abs(a(i, j) - a(j, i)) > 1e-12 * scale)
        throw Error("sym_eig: matrix is not symmetric");
      const double s = 0.5 * (a(i, j) + a(j, i));
      a(i, j) = a(j, i) = s;
    }

  Matrix v = Matrix::identity(n);
  constexpr int kMaxSweeps = 100;
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (off == 0.0) break;

    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double app = a(p, p);
        const double aqq = a(q, q);
        // Entries negligible against both diagonals are dropped after a few sweeps.
        const double g = 100.0 * std::abs(apq);
        if (sweep > 3 && std::abs(app) + g == std::abs(app) && std::abs(aqq) + g == std::abs(aqq)) {
          a(p, q) = a(q, p) = 0.0;
          continue;
        }
        const double theta = (aqq - app) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;

        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        a(p, q) = a(q, p) = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return a(i, i) > a(j, j); });

  SymEigResult result;
  result.eigenvalues.resize(n);
  result.eigenvectors = Matrix(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    result.eigenvalues[j] = a(order[j], order[j]);
    for (std::size_t i = 0; i < n; ++i) result.eigenvectors(i, j) = v(i, order[j]);
  }
  detail::fix_column_signs(result.eigenvectors);
  return result;
}

struct SvdResult {
  Matrix u;                           // rows(A) x k, orthonormal columns
  std::vector<double> singular_values;  // descending, length k = min(rows, cols)
  Matrix v;                           // cols(A) x k, orthonormal columns
};

/**
 * Thin SVD for small matrices via the eigendecomposition of A^T A.
 *
 * Left vectors are A v_i / sigma_i, re-orthogonalized; directions with a
 * vanishing singular value are completed from the standard basis.
 */
inline SvdResult svd_small(const Matrix& a) {
  const std::size_t r = a.rows();
  const std::size_t c = a.cols();
  const std::size_t k = std::min(r, c);
  const auto eig = sym_eig(transpose(a) * a);

  SvdResult out;
  out.singular_values.resize(k);
  out.v = Matrix(c, k);
  out.u = Matrix(r, k);
  for (std::size_t j = 0; j < k; ++j) {
    out.singular_values[j] = std::sqrt(std::max(eig.eigenvalues[j], 0.0));
    for (std::size_t i = 0; i < c; ++i) out.v(i, j) = eig.eigenvectors(i, j);
  }

  const double sigma_max = k > 0 ? out.singular_values[0] : 0.0;
  const double tiny = static_cast<double>(std::max(r, c)) * std::numeric_limits<double>::epsilon() * sigma_max;
  std::size_t next_basis = 0;
  std::vector<double> w(r);
  for (std::size_t j = 0; j < k; ++j) {
    const double sigma = out.singular_values[j];
    std::fill(w.begin(), w.end(), 0.0);
    if (sigma > tiny) {
      for (std::size_t i = 0; i < r; ++i)
        for (std::size_t l = 0; l < c; ++l) w[i] += a(i, l) * out.v(l, j);
      for (double& x : w) x /= sigma;
    }
    auto orthogonalize = [&] {
      for (int pass = 0; pass < 2; ++pass)
        for (std::size_t p = 0; p < j; ++p) {
          double dot = 0.0;
          for (std::size_t i = 0; i < r; ++i) dot += w[i] * out.u(i, p);
          for (std::size_t i = 0; i < r; ++i) w[i] -= dot * out.u(i, p);
        }
      double norm = 0.0;
      for (double x : w) norm += x * x;
      return std::sqrt(norm);
    };
    double norm = orthogonalize();
    while (norm < 0.5 && next_basis < r) {
      std::fill(w.begin(), w.end(), 0.0);
      w[next_basis++] = 1.0;
      norm = orthogonalize();
    }
    for (std::size_t i = 0; i < r; ++i) out.u(i, j) = w[i] / norm;
  }
  return out;
}

struct MdsResult {
  Matrix coordinates;             // m x dim, centered
  std::vector<double> spectrum;   // all eigenvalues of the doubly centered Gram matrix
};

// B = -1/2 C (D∘D) C, coordinates from the top eigenpairs with negative eigenvalues clamped to zero.
inline MdsResult classical_mds_full(const Matrix& distances, std::size_t dim) {
  detail::require_square(distances, "classical_mds");
  const std::size_t m = distances.rows();
  if (dim == 0) throw Error("classical_mds: dimension must be positive");
  if (dim >= m) throw Error("classical_mds: dimension must be smaller than the number of points");

  Matrix sq(m, m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) sq(i, j) = distances(i, j) * distances(i, j);
  std::vector<double> row_mean(m, 0.0);
  std::vector<double> col_mean(m, 0.0);
  double grand = 0.0;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      row_mean[i] += sq(i, j);
      col_mean[j] += sq(i, j);
      grand += sq(i, j);
    }
  const double md = static_cast<double>(m);
  for (std::size_t i = 0; i < m; ++i) {
    row_mean[i] /= md;
    col_mean[i] /= md;
  }
  grand /= md * md;

  Matrix gram(m, m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j)
      gram(i, j) = -0.5 * (sq(i, j) - row_mean[i] - col_mean[j] + grand);

  auto eig = sym_eig(gram);
  MdsResult out;
  out.coordinates = Matrix(m, dim);
  for (std::size_t j = 0; j < dim; ++j) {
    const double root = std::sqrt(std::max(eig.eigenvalues[j], 0.0));
    for (std::size_t i = 0; i < m; ++i) out.coordinates(i, j) = eig.eigenvectors(i, j) * root;
  }
  out.coordinates = center_columns(std::move(out.coordinates));
  out.spectrum = std::move(eig.eigenvalues);
  return out;
}

inline Matrix classical_mds(const Matrix& distances, std::size_t dim) {
  return classical_mds_full(distances, dim).coordinates;
}

// Euclidean distance matrix between the rows of x.
inline Matrix pairwise_distances(const Matrix& x) {
  const std::size_t n = x.rows();
  Matrix d(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      double s = 0.0;
      for (std::size_t c = 0; c < x.cols(); ++c) {
        const double diff = x(i, c) - x(j, c);
        s += diff * diff;
      }
      d(i, j) = d(j, i) = std::sqrt(s);
    }
  return d;
}

}  // namespace latent
