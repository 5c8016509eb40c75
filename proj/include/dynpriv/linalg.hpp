#ifndef DYNPRIV_LINALG_HPP
#define DYNPRIV_LINALG_HPP

// Small dense linear algebra: everything in this project is at most a few
// hundred unknowns, so row-major dense storage is enough.

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dynpriv/errors.hpp"

namespace dynpriv {

using Vector = std::vector<double>;

class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  /// Row-major nested initializer; all rows must have equal length.
  Matrix(std::initializer_list<std::initializer_list<double>> rows) {
    rows_ = rows.size();
    cols_ = rows_ == 0 ? 0 : rows.begin()->size();
    data_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
      if (r.size() != cols_) throw InvalidArgument("ragged matrix initializer");
      data_.insert(data_.end(), r.begin(), r.end());
    }
  }

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  static Matrix diagonal(std::span<const double> d) {
    Matrix m(d.size(), d.size());
    for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool square() const { return rows_ == cols_; }

  double& operator()(std::size_t i, std::size_t j) {
    assert(i < rows_ && j < cols_);
    return data_[i * cols_ + j];
  }
  double operator()(std::size_t i, std::size_t j) const {
    assert(i < rows_ && j < cols_);
    return data_[i * cols_ + j];
  }

  std::span<const double> row(std::size_t i) const {
    return {data_.data() + i * cols_, cols_};
  }
  const Vector& data() const { return data_; }

  Matrix transposed() const {
    Matrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
  }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  Vector data_;
};

inline Matrix operator+(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw InvalidArgument("matrix sum: shape mismatch");
  Matrix c(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) c(i, j) = a(i, j) + b(i, j);
  return c;
}

inline Matrix operator-(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw InvalidArgument("matrix difference: shape mismatch");
  Matrix c(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) c(i, j) = a(i, j) - b(i, j);
  return c;
}

inline Matrix operator*(double s, const Matrix& a) {
  Matrix c = a;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) c(i, j) *= s;
  return c;
}

inline Matrix operator*(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw InvalidArgument("matrix product: shape mismatch");
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
    }
  return c;
}

inline Vector operator*(const Matrix& a, std::span<const double> x) {
  if (a.cols() != x.size()) throw InvalidArgument("matrix-vector product: shape mismatch");
  Vector y(a.rows(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double acc = 0.0;
    const auto r = a.row(i);
    for (std::size_t j = 0; j < a.cols(); ++j) acc += r[j] * x[j];
    y[i] = acc;
  }
  return y;
}

inline Vector operator*(const Matrix& a, const Vector& x) {
  return a * std::span<const double>(x);
}

/// Kronecker product a ⊗ b.
inline Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix k(a.rows() * b.rows(), a.cols() * b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      for (std::size_t p = 0; p < b.rows(); ++p)
        for (std::size_t q = 0; q < b.cols(); ++q)
          k(i * b.rows() + p, j * b.cols() + q) = a(i, j) * b(p, q);
  return k;
}

inline bool is_symmetric(const Matrix& a, double tol = 1e-12) {
  if (!a.square()) return false;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = i + 1; j < a.cols(); ++j)
      if (std::abs(a(i, j) - a(j, i)) > tol) return false;
  return true;
}

inline double norm_inf(std::span<const double> x) {
  double m = 0.0;
  for (double v : x) m = std::max(m, std::abs(v));
  return m;
}

inline double norm2(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s);
}

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double sum(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v;
  return s;
}

inline double mean(std::span<const double> x) {
  if (x.empty()) throw InvalidArgument("mean of empty vector");
  return sum(x) / static_cast<double>(x.size());
}

inline bool all_finite(std::span<const double> x) {
  return std::all_of(x.begin(), x.end(), [](double v) { return std::isfinite(v); });
}

/// Solves A x = b by Gaussian elimination with partial pivoting.
/// Throws SingularMatrix when a pivot falls below `pivot_tol` times the
/// largest entry of A.
inline Vector solve(Matrix a, Vector b, double pivot_tol = 1e-13) {
  const std::size_t n = a.rows();
  if (!a.square() || b.size() != n) throw InvalidArgument("solve: shape mismatch");
  double scale = 0.0;
  for (double v : a.data()) scale = std::max(scale, std::abs(v));
  if (scale == 0.0) {
    if (n == 0) return b;
    throw SingularMatrix("solve: zero matrix");
  }
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    for (std::size_t i = k + 1; i < n; ++i)
      if (std::abs(a(i, k)) > std::abs(a(piv, k))) piv = i;
    if (std::abs(a(piv, k)) <= pivot_tol * scale)
      throw SingularMatrix("solve: matrix is singular to working precision");
    if (piv != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a(k, j), a(piv, j));
      std::swap(b[k], b[piv]);
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      const double f = a(i, k) / a(k, k);
      if (f == 0.0) continue;
      for (std::size_t j = k; j < n; ++j) a(i, j) -= f * a(k, j);
      b[i] -= f * b[k];
    }
  }
  Vector x(n);
  for (std::size_t k = n; k-- > 0;) {
    double acc = b[k];
    for (std::size_t j = k + 1; j < n; ++j) acc -= a(k, j) * x[j];
    x[k] = acc / a(k, k);
  }
  return x;
}

struct SymmetricEigen {
  Vector values;   // ascending
  Matrix vectors;  // columns are eigenvectors, same order as values
  int sweeps = 0;
};

/// Cyclic Jacobi eigen-decomposition of a symmetric matrix. Iterates until the
/// off-diagonal Frobenius norm drops below `off_tol` (absolute, scaled by the
/// Frobenius norm of the input when that exceeds one).
inline SymmetricEigen jacobi_eigen(Matrix a, double off_tol = 1e-12, int max_sweeps = 100) {
  if (!is_symmetric(a, 1e-10)) throw InvalidArgument("jacobi_eigen: matrix not symmetric");
  const std::size_t n = a.rows();
  Matrix v = Matrix::identity(n);

  double frob = 0.0;
  for (double x : a.data()) frob += x * x;
  const double target = off_tol * std::max(1.0, std::sqrt(frob));

  auto off_norm = [&] {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) s += 2.0 * a(i, j) * a(i, j);
    return std::sqrt(s);
  };

  int sweep = 0;
  for (; sweep < max_sweeps && off_norm() > target; ++sweep) {
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  if (off_norm() > target) throw Error("jacobi_eigen: no convergence");

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t i, std::size_t j) { return a(i, i) < a(j, j); });
  SymmetricEigen out;
  out.values.resize(n);
  out.vectors = Matrix(n, n);
  for (std::size_t c = 0; c < n; ++c) {
    out.values[c] = a(order[c], order[c]);
    for (std::size_t k = 0; k < n; ++k) out.vectors(k, c) = v(k, order[c]);
  }
  out.sweeps = sweep;
  return out;
}

inline double max_eigenvalue_symmetric(const Matrix& a) {
  return jacobi_eigen(a).values.back();
}

inline double min_eigenvalue_symmetric(const Matrix& a) {
  return jacobi_eigen(a).values.front();
}

/// Perron root of an entrywise nonnegative square matrix, by power iteration
/// on A + I (primitive whenever A is irreducible; the shift keeps the
/// iteration from cycling on periodic graphs).
inline double spectral_radius_nonnegative(const Matrix& a, double tol = 1e-13,
                                          int max_iter = 200000) {
  const std::size_t n = a.rows();
  if (!a.square()) throw InvalidArgument("spectral radius: matrix not square");
  for (double v : a.data())
    if (v < 0.0) throw InvalidArgument("spectral radius: matrix has negative entries");
  if (n == 0) return 0.0;
  Vector x(n, 1.0 / static_cast<double>(n));
  double lambda = 0.0;
  for (int it = 0; it < max_iter; ++it) {
    Vector y = a * x;
    for (std::size_t i = 0; i < n; ++i) y[i] += x[i];
    const double s = sum(y);
    if (s == 0.0) return 0.0;
    for (double& v : y) v /= s;
    // Collatz-Wielandt bounds bracket the Perron root of A + I.
    Vector ay = a * y;
    double lo = INFINITY, hi = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (y[i] <= 0.0) continue;
      const double r = (ay[i] + y[i]) / y[i];
      lo = std::min(lo, r);
      hi = std::max(hi, r);
    }
    lambda = 0.5 * (lo + hi);
    x = std::move(y);
    if (hi - lo <= tol * std::max(1.0, hi)) break;
  }
  return lambda - 1.0;
}

/// Compressed row storage for fast repeated products with a fixed matrix.
class SparseRows {
 public:
  SparseRows() = default;
  explicit SparseRows(const Matrix& m) : rows_(m.rows()), cols_(m.cols()) {
    start_.reserve(rows_ + 1);
    start_.push_back(0);
    for (std::size_t i = 0; i < rows_; ++i) {
      for (std::size_t j = 0; j < cols_; ++j) {
        if (m(i, j) != 0.0) {
          col_.push_back(j);
          val_.push_back(m(i, j));
        }
      }
      start_.push_back(col_.size());
    }
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double row_dot(std::size_t i, std::span<const double> x) const {
    double acc = 0.0;
    for (std::size_t k = start_[i]; k < start_[i + 1]; ++k) acc += val_[k] * x[col_[k]];
    return acc;
  }

  /// Row i applied to a block vector with `stride` components per node:
  /// returns sum_j m(i,j) * x[j*stride + c].
  double row_dot_block(std::size_t i, std::span<const double> x, std::size_t stride,
                       std::size_t c) const {
    double acc = 0.0;
    for (std::size_t k = start_[i]; k < start_[i + 1]; ++k)
      acc += val_[k] * x[col_[k] * stride + c];
    return acc;
  }

 private:
  std::size_t rows_ = 0, cols_ = 0;
  std::vector<std::size_t> start_;
  std::vector<std::size_t> col_;
  Vector val_;
};

}  // namespace dynpriv

#endif  // DYNPRIV_LINALG_HPP
