#pragma once

#include <cmath>
#include <vector>

#include "coil/errors.hpp"
#include "coil/rng.hpp"

namespace coil {

// Dense row-major matrix of doubles. Vectors are 1xN or Nx1 tensors.
struct Tensor {
  int rows = 0;
  int cols = 0;
  std::vector<double> v;

  Tensor() = default;
  Tensor(int r, int c) : rows(r), cols(c), v(static_cast<size_t>(r) * c, 0.0) {
    if (r < 0 || c < 0) throw ShapeError("negative tensor dimension");
  }

  static Tensor zeros(int r, int c) { return Tensor(r, c); }
  static Tensor full(int r, int c, double value) {
    Tensor t(r, c);
    std::fill(t.v.begin(), t.v.end(), value);
    return t;
  }
  static Tensor from_row(const std::vector<double>& row) {
    Tensor t(1, static_cast<int>(row.size()));
    t.v = row;
    return t;
  }

  int size() const { return rows * cols; }
  double& at(int i, int j) { return v[static_cast<size_t>(i) * cols + j]; }
  double at(int i, int j) const { return v[static_cast<size_t>(i) * cols + j]; }
  double* data() { return v.data(); }
  const double* data() const { return v.data(); }

  bool same_shape(const Tensor& o) const {
    return rows == o.rows && cols == o.cols;
  }
  bool finite() const {
    for (double x : v)
      if (!std::isfinite(x)) return false;
    return true;
  }
  void fill_uniform(Rng& rng, double lo, double hi) {
    for (double& x : v) x = rng.uniform(lo, hi);
  }
  void fill_normal(Rng& rng, double mean, double stddev) {
    for (double& x : v) x = rng.normal(mean, stddev);
  }
};

}  // namespace coil
