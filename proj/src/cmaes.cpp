#include "coil/cmaes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "coil/errors.hpp"
#include "coil/linalg.hpp"

namespace coil::opt {

Cmaes::Cmaes(int dim, std::uint64_t seed, double sigma0)
    : dim_(dim),
      sigma_(sigma0),
      c_(dim, dim),
      b_(dim, dim),
      rng_(derive_seed(seed, "cmaes")),
      best_f_(std::numeric_limits<double>::infinity()) {
  if (dim < 1) throw DimensionError("cmaes: dimension must be positive");
  lambda_ = 4 + static_cast<int>(std::floor(3.0 * std::log(dim)));
  mu_ = lambda_ / 2;
  weights_.resize(mu_);
  for (int i = 0; i < mu_; ++i)
    weights_[i] = std::log(mu_ + 0.5) - std::log(i + 1.0);
  const double wsum = std::accumulate(weights_.begin(), weights_.end(), 0.0);
  double w2 = 0.0;
  for (double& w : weights_) {
    w /= wsum;
    w2 += w * w;
  }
  mu_eff_ = 1.0 / w2;

  const double n = dim;
  cc_ = (4.0 + mu_eff_ / n) / (n + 4.0 + 2.0 * mu_eff_ / n);
  cs_ = (mu_eff_ + 2.0) / (n + mu_eff_ + 5.0);
  c1_ = 2.0 / ((n + 1.3) * (n + 1.3) + mu_eff_);
  cmu_ = std::min(1.0 - c1_, 2.0 * (mu_eff_ - 2.0 + 1.0 / mu_eff_) /
                                 ((n + 2.0) * (n + 2.0) + mu_eff_));
  damps_ =
      1.0 + 2.0 * std::max(0.0, std::sqrt((mu_eff_ - 1.0) / (n + 1.0)) - 1.0) +
      cs_;
  chi_n_ = std::sqrt(n) * (1.0 - 1.0 / (4.0 * n) + 1.0 / (21.0 * n * n));

  mean_.assign(dim, 0.5);
  ps_.assign(dim, 0.0);
  pc_.assign(dim, 0.0);
  for (int i = 0; i < dim; ++i) c_.at(i, i) = 1.0;
  decompose();
}

void Cmaes::decompose() {
  linalg::jacobi_eigen(c_, &b_, &d_);
  for (double& e : d_) e = std::sqrt(std::max(e, 1e-20));
}

Tensor Cmaes::ask() {
  Tensor xs(lambda_, dim_);
  for (int k = 0; k < lambda_; ++k) {
    std::vector<double> z(dim_);
    for (double& v : z) v = rng_.normal();
    for (int i = 0; i < dim_; ++i) {
      double s = 0.0;
      for (int j = 0; j < dim_; ++j) s += b_.at(i, j) * d_[j] * z[j];
      xs.at(k, i) = std::clamp(mean_[i] + sigma_ * s, 0.0, 1.0);
    }
  }
  return xs;
}

void Cmaes::tell(const Tensor& xs, const std::vector<double>& fitness) {
  if (xs.rows != lambda_ || xs.cols != dim_ ||
      static_cast<int>(fitness.size()) != lambda_)
    throw DimensionError("cmaes tell: population shape mismatch");

  std::vector<int> order(lambda_);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return fitness[a] < fitness[b]; });
  if (fitness[order[0]] < best_f_) {
    best_f_ = fitness[order[0]];
    best_x_.assign(xs.data() + static_cast<size_t>(order[0]) * dim_,
                   xs.data() + static_cast<size_t>(order[0] + 1) * dim_);
  }

  const std::vector<double> old_mean = mean_;
  std::fill(mean_.begin(), mean_.end(), 0.0);
  for (int r = 0; r < mu_; ++r)
    for (int i = 0; i < dim_; ++i)
      mean_[i] += weights_[r] * xs.at(order[r], i);

  std::vector<double> y(dim_);
  for (int i = 0; i < dim_; ++i) y[i] = (mean_[i] - old_mean[i]) / sigma_;

  // C^{-1/2} y = B D^{-1} B^T y.
  std::vector<double> bty(dim_, 0.0), cinv_y(dim_, 0.0);
  for (int j = 0; j < dim_; ++j) {
    double s = 0.0;
    for (int i = 0; i < dim_; ++i) s += b_.at(i, j) * y[i];
    bty[j] = s / d_[j];
  }
  for (int i = 0; i < dim_; ++i) {
    double s = 0.0;
    for (int j = 0; j < dim_; ++j) s += b_.at(i, j) * bty[j];
    cinv_y[i] = s;
  }

  const double cs_fac = std::sqrt(cs_ * (2.0 - cs_) * mu_eff_);
  double ps_norm2 = 0.0;
  for (int i = 0; i < dim_; ++i) {
    ps_[i] = (1.0 - cs_) * ps_[i] + cs_fac * cinv_y[i];
    ps_norm2 += ps_[i] * ps_[i];
  }
  const double denom =
      std::sqrt(1.0 - std::pow(1.0 - cs_, 2.0 * (generation_ + 1)));
  const bool hsig =
      std::sqrt(ps_norm2) / denom / chi_n_ < 1.4 + 2.0 / (dim_ + 1.0);

  const double cc_fac = std::sqrt(cc_ * (2.0 - cc_) * mu_eff_);
  for (int i = 0; i < dim_; ++i)
    pc_[i] = (1.0 - cc_) * pc_[i] + (hsig ? cc_fac * y[i] : 0.0);

  const double c1a = c1_ * (1.0 - (hsig ? 0.0 : cc_ * (2.0 - cc_)));
  for (int i = 0; i < dim_; ++i)
    for (int j = 0; j < dim_; ++j) {
      double rank_mu = 0.0;
      for (int r = 0; r < mu_; ++r) {
        const double yi = (xs.at(order[r], i) - old_mean[i]) / sigma_;
        const double yj = (xs.at(order[r], j) - old_mean[j]) / sigma_;
        rank_mu += weights_[r] * yi * yj;
      }
      c_.at(i, j) = (1.0 - c1a - cmu_) * c_.at(i, j) +
                    c1_ * pc_[i] * pc_[j] + cmu_ * rank_mu;
    }
  // Symmetrize against drift before the eigendecomposition.
  for (int i = 0; i < dim_; ++i)
    for (int j = i + 1; j < dim_; ++j) {
      const double avg = 0.5 * (c_.at(i, j) + c_.at(j, i));
      c_.at(i, j) = avg;
      c_.at(j, i) = avg;
    }

  sigma_ *= std::exp(cs_ / damps_ * (std::sqrt(ps_norm2) / chi_n_ - 1.0));
  sigma_ = std::min(sigma_, 10.0);
  ++generation_;
  decompose();
}

}  // namespace coil::opt
