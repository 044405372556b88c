#pragma once

#include <cmath>
#include <vector>

#include "coil/errors.hpp"
#include "coil/tensor.hpp"

namespace coil::linalg {

// Cholesky factorization A = L L^T of a symmetric positive definite matrix
// (lower triangle returned; upper left untouched garbage is zeroed). Throws
// SolverError if a pivot is not positive.
inline Tensor cholesky(const Tensor& a) {
  if (a.rows != a.cols) throw ShapeError("cholesky: matrix must be square");
  const int n = a.rows;
  Tensor l(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j <= i; ++j) {
      double s = a.at(i, j);
      for (int k = 0; k < j; ++k) s -= l.at(i, k) * l.at(j, k);
      if (i == j) {
        if (s <= 0.0 || !std::isfinite(s))
          throw SolverError("cholesky: matrix not positive definite");
        l.at(i, j) = std::sqrt(s);
      } else {
        l.at(i, j) = s / l.at(j, j);
      }
    }
  }
  return l;
}

// Solves L y = b (forward) then L^T x = y (backward) for one right-hand side.
inline std::vector<double> chol_solve(const Tensor& l,
                                      const std::vector<double>& b) {
  const int n = l.rows;
  if (static_cast<int>(b.size()) != n)
    throw ShapeError("chol_solve: rhs length mismatch");
  std::vector<double> x(b);
  for (int i = 0; i < n; ++i) {
    double s = x[i];
    for (int k = 0; k < i; ++k) s -= l.at(i, k) * x[k];
    x[i] = s / l.at(i, i);
  }
  for (int i = n - 1; i >= 0; --i) {
    double s = x[i];
    for (int k = i + 1; k < n; ++k) s -= l.at(k, i) * x[k];
    x[i] = s / l.at(i, i);
  }
  return x;
}

// Forward substitution only: L y = b.
inline std::vector<double> forward_solve(const Tensor& l,
                                         const std::vector<double>& b) {
  const int n = l.rows;
  std::vector<double> y(b);
  for (int i = 0; i < n; ++i) {
    double s = y[i];
    for (int k = 0; k < i; ++k) s -= l.at(i, k) * y[k];
    y[i] = s / l.at(i, i);
  }
  return y;
}

// General dense solve with partial pivoting (small systems; test oracles and
// the simulator fall back here if they ever need a non-SPD solve).
inline std::vector<double> solve(Tensor a, std::vector<double> b) {
  if (a.rows != a.cols || a.rows != static_cast<int>(b.size()))
    throw ShapeError("solve: dimension mismatch");
  const int n = a.rows;
  for (int col = 0; col < n; ++col) {
    int piv = col;
    for (int r = col + 1; r < n; ++r)
      if (std::fabs(a.at(r, col)) > std::fabs(a.at(piv, col))) piv = r;
    if (a.at(piv, col) == 0.0) throw SolverError("solve: singular matrix");
    if (piv != col) {
      for (int c = 0; c < n; ++c) std::swap(a.at(piv, c), a.at(col, c));
      std::swap(b[piv], b[col]);
    }
    for (int r = col + 1; r < n; ++r) {
      const double f = a.at(r, col) / a.at(col, col);
      if (f == 0.0) continue;
      for (int c = col; c < n; ++c) a.at(r, c) -= f * a.at(col, c);
      b[r] -= f * b[col];
    }
  }
  std::vector<double> x(n);
  for (int i = n - 1; i >= 0; --i) {
    double s = b[i];
    for (int k = i + 1; k < n; ++k) s -= a.at(i, k) * x[k];
    x[i] = s / a.at(i, i);
  }
  return x;
}

// Cyclic Jacobi eigendecomposition of a symmetric matrix: A = V diag(d) V^T.
// Good enough for the small covariance matrices handled here (n <= ~10).
inline void jacobi_eigen(Tensor a, Tensor* v_out, std::vector<double>* d_out) {
  if (a.rows != a.cols) throw ShapeError("jacobi_eigen: matrix must be square");
  const int n = a.rows;
  Tensor v(n, n);
  for (int i = 0; i < n; ++i) v.at(i, i) = 1.0;
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) off += a.at(p, q) * a.at(p, q);
    if (off < 1e-26) break;
    for (int p = 0; p < n; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const double apq = a.at(p, q);
        if (std::fabs(apq) < 1e-300) continue;
        const double theta = (a.at(q, q) - a.at(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int k = 0; k < n; ++k) {
          const double akp = a.at(k, p);
          const double akq = a.at(k, q);
          a.at(k, p) = c * akp - s * akq;
          a.at(k, q) = s * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          const double apk = a.at(p, k);
          const double aqk = a.at(q, k);
          a.at(p, k) = c * apk - s * aqk;
          a.at(q, k) = s * apk + c * aqk;
        }
        for (int k = 0; k < n; ++k) {
          const double vkp = v.at(k, p);
          const double vkq = v.at(k, q);
          v.at(k, p) = c * vkp - s * vkq;
          v.at(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  d_out->assign(n, 0.0);
  for (int i = 0; i < n; ++i) (*d_out)[i] = a.at(i, i);
  *v_out = std::move(v);
}

}  // namespace coil::linalg
