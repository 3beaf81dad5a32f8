#pragma once

// Dense symmetric-positive-definite linear algebra kernels: Cholesky,
// triangular solves, a cyclic Jacobi eigensolver, square roots and
// rank-one inverse updates. Self-contained, double precision, row-major.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <string>
#include <vector>

#include "bfp/errors.hpp"

namespace bfp {

using Vector = std::vector<double>;

inline double dot(const Vector& a, const Vector& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm2(const Vector& a) { return std::sqrt(dot(a, a)); }

inline double norm_inf(const Vector& a) {
  double m = 0.0;
  for (double x : a) m = std::max(m, std::abs(x));
  return m;
}

inline Vector operator-(const Vector& a, const Vector& b) {
  Vector r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
  return r;
}

inline Vector operator+(const Vector& a, const Vector& b) {
  Vector r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
  return r;
}

inline Vector operator*(double c, const Vector& a) {
  Vector r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = c * a[i];
  return r;
}

/// Dense row-major matrix. Minimal surface: this project only needs
/// rectangular storage, products and transposed products.
class Matrix {
 public:
  Matrix() = default;
  Matrix(int rows, int cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows) * cols, fill) {}

  static Matrix identity(int n) {
    Matrix m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }

  double& operator()(int i, int j) { return data_[static_cast<std::size_t>(i) * cols_ + j]; }
  double operator()(int i, int j) const { return data_[static_cast<std::size_t>(i) * cols_ + j]; }

  const double* row(int i) const { return data_.data() + static_cast<std::size_t>(i) * cols_; }
  double* row(int i) { return data_.data() + static_cast<std::size_t>(i) * cols_; }

  Vector row_vector(int i) const {
    return Vector(row(i), row(i) + cols_);
  }

  double max_abs() const {
    double m = 0.0;
    for (double x : data_) m = std::max(m, std::abs(x));
    return m;
  }

  const std::vector<double>& data() const { return data_; }

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> data_;
};

inline Vector mat_vec(const Matrix& m, const Vector& v) {
  if (static_cast<int>(v.size()) != m.cols())
    throw DimensionMismatch("mat_vec: vector length " + std::to_string(v.size()) +
                            " vs matrix cols " + std::to_string(m.cols()));
  Vector r(m.rows(), 0.0);
  for (int i = 0; i < m.rows(); ++i) {
    const double* mi = m.row(i);
    double s = 0.0;
    for (int j = 0; j < m.cols(); ++j) s += mi[j] * v[j];
    r[i] = s;
  }
  return r;
}

inline Vector mat_t_vec(const Matrix& m, const Vector& v) {
  if (static_cast<int>(v.size()) != m.rows())
    throw DimensionMismatch("mat_t_vec: size mismatch");
  Vector r(m.cols(), 0.0);
  for (int i = 0; i < m.rows(); ++i) {
    const double* mi = m.row(i);
    for (int j = 0; j < m.cols(); ++j) r[j] += mi[j] * v[i];
  }
  return r;
}

inline Matrix mat_mul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw DimensionMismatch("mat_mul: inner dimensions differ");
  Matrix c(a.rows(), b.cols());
  for (int i = 0; i < a.rows(); ++i) {
    for (int k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      const double* bk = b.row(k);
      double* ci = c.row(i);
      for (int j = 0; j < b.cols(); ++j) ci[j] += aik * bk[j];
    }
  }
  return c;
}

inline Matrix transpose(const Matrix& a) {
  Matrix t(a.cols(), a.rows());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
  return t;
}

/// Symmetric matrix assumed positive definite. Construction symmetrizes
/// (M + Mᵀ)/2; asymmetry beyond 1e-8 relative to the largest entry is a
/// caller bug and throws. Positive definiteness is established lazily by
/// whichever factorization touches the matrix first.
class SpdMatrix {
 public:
  SpdMatrix() = default;

  explicit SpdMatrix(Matrix m) {
    if (m.rows() != m.cols())
      throw DimensionMismatch("SpdMatrix: matrix is " + std::to_string(m.rows()) + "x" +
                              std::to_string(m.cols()));
    const double scale = m.max_abs();
    double asym = 0.0;
    for (int i = 0; i < m.rows(); ++i)
      for (int j = i + 1; j < m.cols(); ++j)
        asym = std::max(asym, std::abs(m(i, j) - m(j, i)));
    if (scale > 0.0 && asym > 1e-8 * scale)
      throw Error("SpdMatrix: asymmetry " + std::to_string(asym / scale) +
                  " relative exceeds 1e-8");
    for (int i = 0; i < m.rows(); ++i)
      for (int j = i + 1; j < m.cols(); ++j) {
        const double v = 0.5 * (m(i, j) + m(j, i));
        m(i, j) = v;
        m(j, i) = v;
      }
    mat_ = std::move(m);
  }

  static SpdMatrix identity(int n) { return SpdMatrix(Matrix::identity(n)); }

  int dim() const { return mat_.rows(); }
  double operator()(int i, int j) const { return mat_(i, j); }
  double& entry(int i, int j) { return mat_(i, j); }
  const Matrix& matrix() const { return mat_; }

 private:
  Matrix mat_;
};

/// Lower-triangular Cholesky factor L with L·Lᵀ = M.
class CholeskyFactor {
 public:
  CholeskyFactor() = default;
  explicit CholeskyFactor(Matrix lower) : lower_(std::move(lower)) {}

  int dim() const { return lower_.rows(); }
  const Matrix& lower() const { return lower_; }

  /// Solves L y = b.
  Vector solve_lower(const Vector& b) const {
    const int n = dim();
    Vector y(b);
    for (int i = 0; i < n; ++i) {
      const double* li = lower_.row(i);
      double s = y[i];
      for (int j = 0; j < i; ++j) s -= li[j] * y[j];
      y[i] = s / li[i];
    }
    return y;
  }

  /// Solves Lᵀ x = b.
  Vector solve_upper(const Vector& b) const {
    const int n = dim();
    Vector x(b);
    for (int i = n - 1; i >= 0; --i) {
      double s = x[i];
      for (int j = i + 1; j < n; ++j) s -= lower_(j, i) * x[j];
      x[i] = s / lower_(i, i);
    }
    return x;
  }

  /// Solves (L Lᵀ) x = b.
  Vector solve(const Vector& b) const { return solve_upper(solve_lower(b)); }

  double log_det() const {
    double s = 0.0;
    for (int i = 0; i < dim(); ++i) s += std::log(lower_(i, i));
    return 2.0 * s;
  }

  /// ‖L⁻¹ v‖² — the quadratic form vᵀ M⁻¹ v.
  double quad_form_inv(const Vector& v) const {
    Vector y = solve_lower(v);
    return dot(y, y);
  }

 private:
  Matrix lower_;
};

inline CholeskyFactor cholesky_spd(const SpdMatrix& m) {
  const int n = m.dim();
  Matrix l(n, n);
  for (int j = 0; j < n; ++j) {
    double diag = m(j, j);
    for (int k = 0; k < j; ++k) diag -= l(j, k) * l(j, k);
    if (!(diag > 0.0))
      throw NotPositiveDefinite("cholesky_spd: nonpositive pivot at index " + std::to_string(j));
    const double ljj = std::sqrt(diag);
    l(j, j) = ljj;
    for (int i = j + 1; i < n; ++i) {
      double s = m(i, j);
      const double* li = l.row(i);
      const double* lj = l.row(j);
      for (int k = 0; k < j; ++k) s -= li[k] * lj[k];
      l(i, j) = s / ljj;
    }
  }
  return CholeskyFactor(std::move(l));
}

inline Vector solve_spd(const SpdMatrix& m, const Vector& rhs) {
  if (static_cast<int>(rhs.size()) != m.dim())
    throw DimensionMismatch("solve_spd: rhs length mismatch");
  return cholesky_spd(m).solve(rhs);
}

/// Explicit inverse via the Cholesky factor. Used where the inverse itself
/// is reused many times (sample-summary caches, fixed-point updates).
inline SpdMatrix invert_spd(const SpdMatrix& m) {
  const int n = m.dim();
  CholeskyFactor f = cholesky_spd(m);
  Matrix inv(n, n);
  Vector e(n, 0.0);
  for (int j = 0; j < n; ++j) {
    e[j] = 1.0;
    Vector x = f.solve(e);
    for (int i = 0; i < n; ++i) inv(i, j) = x[i];
    e[j] = 0.0;
  }
  // symmetrize away the last-bit noise of the columnwise solves
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const double v = 0.5 * (inv(i, j) + inv(j, i));
      inv(i, j) = v;
      inv(j, i) = v;
    }
  return SpdMatrix(std::move(inv));
}

/// Eigenvectors (columns of P) and ascending eigenvalues of a symmetric
/// matrix, P D Pᵀ = M.
struct SpectralDecomposition {
  Matrix eigenvectors;
  Vector eigenvalues;
};

/// Cyclic Jacobi rotations. Adequate and very accurate for the moderate
/// dimensions this library targets; the rotation budget is 30·d².
inline SpectralDecomposition spectral_decomposition_spd(const SpdMatrix& m) {
  const int n = m.dim();
  Matrix a = m.matrix();
  Matrix p = Matrix::identity(n);
  if (n == 1) return SpectralDecomposition{p, Vector{a(0, 0)}};

  const long budget = 30L * n * n;
  long rotations = 0;
  const double scale = std::max(a.max_abs(), 1e-300);
  bool converged = false;
  while (!converged) {
    double off = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) off = std::max(off, std::abs(a(i, j)));
    if (off <= 1e-15 * scale) {
      converged = true;
      break;
    }
    for (int iq = 0; iq < n - 1; ++iq) {
      for (int jq = iq + 1; jq < n; ++jq) {
        const double apq = a(iq, jq);
        if (std::abs(apq) <= 1e-16 * scale) continue;
        if (++rotations > budget)
          throw ConvergenceFailure("spectral_decomposition_spd: rotation budget exceeded");
        const double app = a(iq, iq);
        const double aqq = a(jq, jq);
        const double theta = 0.5 * (aqq - app) / apq;
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        const double tau = s / (1.0 + c);
        a(iq, iq) = app - t * apq;
        a(jq, jq) = aqq + t * apq;
        a(iq, jq) = 0.0;
        a(jq, iq) = 0.0;
        for (int k = 0; k < n; ++k) {
          if (k != iq && k != jq) {
            const double akp = a(k, iq);
            const double akq = a(k, jq);
            a(k, iq) = akp - s * (akq + tau * akp);
            a(iq, k) = a(k, iq);
            a(k, jq) = akq + s * (akp - tau * akq);
            a(jq, k) = a(k, jq);
          }
          const double pkp = p(k, iq);
          const double pkq = p(k, jq);
          p(k, iq) = pkp - s * (pkq + tau * pkp);
          p(k, jq) = pkq + s * (pkp - tau * pkq);
        }
      }
    }
  }

  Vector d(n);
  for (int i = 0; i < n; ++i) d[i] = a(i, i);
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int i, int j) { return d[i] < d[j]; });
  Matrix psorted(n, n);
  Vector dsorted(n);
  for (int j = 0; j < n; ++j) {
    dsorted[j] = d[order[j]];
    for (int i = 0; i < n; ++i) psorted(i, j) = p(i, order[j]);
  }
  return SpectralDecomposition{std::move(psorted), std::move(dsorted)};
}

/// Symmetric square root P·√D·Pᵀ from a decomposition of an SPD matrix.
inline Matrix spd_sqrt(const SpectralDecomposition& sd) {
  const int n = sd.eigenvectors.rows();
  Matrix r(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      double s = 0.0;
      for (int k = 0; k < n; ++k) {
        const double ev = sd.eigenvalues[k];
        if (!(ev > 0.0)) throw NotPositiveDefinite("spd_sqrt: nonpositive eigenvalue");
        s += sd.eigenvectors(i, k) * std::sqrt(ev) * sd.eigenvectors(j, k);
      }
      r(i, j) = s;
      r(j, i) = s;
    }
  }
  return r;
}

inline Matrix spd_sqrt(const SpdMatrix& m) { return spd_sqrt(spectral_decomposition_spd(m)); }

/// (M + vvᵀ)⁻¹ from M⁻¹ by the Sherman–Morrison identity:
/// M⁻¹ − (M⁻¹v)(M⁻¹v)ᵀ / (1 + vᵀM⁻¹v).
inline SpdMatrix rank_one_inverse_update(const SpdMatrix& m_inv, const Vector& v) {
  const int n = m_inv.dim();
  if (static_cast<int>(v.size()) != n)
    throw DimensionMismatch("rank_one_inverse_update: vector length mismatch");
  Vector w = mat_vec(m_inv.matrix(), v);
  const double denom = 1.0 + dot(v, w);
  Matrix r = m_inv.matrix();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) r(i, j) -= w[i] * w[j] / denom;
  return SpdMatrix(std::move(r));
}

}  // namespace bfp
