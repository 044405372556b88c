#include "coil/gp.hpp"

#include <algorithm>
#include <cmath>

#include "coil/linalg.hpp"
#include "coil/nn.hpp"
#include "coil/rng.hpp"

namespace coil::gp {

namespace {
constexpr double kSqrt5 = 2.23606797749978969;

double scaled_dist(const double* a, const double* b, int dim,
                   const double* ls) {
  double r2 = 0.0;
  for (int d = 0; d < dim; ++d) {
    const double u = (a[d] - b[d]) / ls[d];
    r2 += u * u;
  }
  return std::sqrt(r2);
}
}  // namespace

double matern52(const double* a, const double* b, int dim, const double* ls,
                double sf2) {
  const double r = scaled_dist(a, b, dim, ls);
  return sf2 * (1.0 + kSqrt5 * r + 5.0 / 3.0 * r * r) * std::exp(-kSqrt5 * r);
}

Hyper SurrogateModel::initial_hyper(int dim) {
  Hyper h;
  h.log_ls.assign(dim, std::log(0.5));
  h.log_sf2 = 0.0;
  h.log_sn2 = std::log(1e-2);
  h.mean = 0.0;
  return h;
}

Tensor SurrogateModel::kernel_matrix(const Tensor& a, const Tensor& b,
                                     const Hyper& h) const {
  const int dim = a.cols;
  std::vector<double> ls(dim);
  for (int d = 0; d < dim; ++d) ls[d] = std::exp(h.log_ls[d]);
  const double sf2 = std::exp(h.log_sf2);
  Tensor k(a.rows, b.rows);
  for (int i = 0; i < a.rows; ++i)
    for (int j = 0; j < b.rows; ++j)
      k.at(i, j) = matern52(a.data() + static_cast<size_t>(i) * dim,
                            b.data() + static_cast<size_t>(j) * dim, dim,
                            ls.data(), sf2);
  return k;
}

double SurrogateModel::nll(const Hyper& h) const {
  return nll_with_grad(h).value;
}

SurrogateModel::NllGrad SurrogateModel::nll_with_grad(const Hyper& h) const {
  const int n = x_.rows;
  const int dim = x_.cols;
  std::vector<double> ls(dim);
  for (int d = 0; d < dim; ++d) ls[d] = std::exp(h.log_ls[d]);
  const double sf2 = std::exp(h.log_sf2);
  const double sn2 = cfg_.noise_floor + std::exp(h.log_sn2);

  Tensor kf = kernel_matrix(x_, x_, h);
  Tensor k = kf;
  for (int i = 0; i < n; ++i) k.at(i, i) += sn2;

  Tensor chol(0, 0);
  double jitter = 0.0;
  for (int attempt = 0;; ++attempt) {
    try {
      Tensor kj = k;
      for (int i = 0; i < n; ++i) kj.at(i, i) += jitter;
      chol = linalg::cholesky(kj);
      break;
    } catch (const SolverError&) {
      if (attempt >= 12) throw;
      jitter = jitter == 0.0 ? 1e-12 * (1.0 + sf2) : jitter * 10.0;
    }
  }

  std::vector<double> resid(n);
  for (int i = 0; i < n; ++i) resid[i] = ystd_[i] - h.mean;
  const std::vector<double> alpha = linalg::chol_solve(chol, resid);

  double nll = 0.5 * n * std::log(2.0 * M_PI);
  for (int i = 0; i < n; ++i) {
    nll += 0.5 * resid[i] * alpha[i];
    nll += std::log(chol.at(i, i));
  }

  // W = alpha alpha^T - K^{-1}; dNLL/dtheta = -0.5 tr(W dK/dtheta).
  Tensor kinv(n, n);
  {
    std::vector<double> e(n, 0.0);
    for (int j = 0; j < n; ++j) {
      e[j] = 1.0;
      const std::vector<double> col = linalg::chol_solve(chol, e);
      for (int i = 0; i < n; ++i) kinv.at(i, j) = col[i];
      e[j] = 0.0;
    }
  }
  Tensor w(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      w.at(i, j) = alpha[i] * alpha[j] - kinv.at(i, j);

  NllGrad out;
  out.value = nll;
  out.grad.assign(dim + 3, 0.0);

  // Per-dimension lengthscales: dk/dlog ls_d = (5/3) sf2 (1+sqrt5 r) e^{-sqrt5 r} u_d
  // with u_d = ((x_d - x'_d)/ls_d)^2; the signal term dk/dlog sf2 is kf itself.
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double wij = w.at(i, j);
      const double r =
          scaled_dist(x_.data() + static_cast<size_t>(i) * dim,
                      x_.data() + static_cast<size_t>(j) * dim, dim, ls.data());
      const double common =
          5.0 / 3.0 * sf2 * (1.0 + kSqrt5 * r) * std::exp(-kSqrt5 * r);
      for (int d = 0; d < dim; ++d) {
        const double u = (x_.at(i, d) - x_.at(j, d)) / ls[d];
        out.grad[d] += -0.5 * wij * common * u * u;
      }
      out.grad[dim] += -0.5 * wij * kf.at(i, j);
    }
  // Noise: dK/dlog sn2 = exp(log sn2) I (the floor is a constant offset).
  double tr_w = 0.0;
  for (int i = 0; i < n; ++i) tr_w += w.at(i, i);
  out.grad[dim + 1] = -0.5 * tr_w * std::exp(h.log_sn2);
  // Constant mean: dNLL/dm = -sum(alpha).
  double asum = 0.0;
  for (double a : alpha) asum += a;
  out.grad[dim + 2] = -asum;
  return out;
}

void SurrogateModel::fit(const Tensor& x, const std::vector<double>& y,
                         unsigned long long seed) {
  if (x.rows != static_cast<int>(y.size()))
    throw DimensionError("gp fit: x rows and y length disagree");
  if (x.rows < 2) throw InsufficientData("gp fit: need at least 2 points");

  // Keep the most recent `window` observations.
  const int keep = std::min(x.rows, cfg_.window);
  const int skip = x.rows - keep;
  x_ = Tensor(keep, x.cols);
  std::vector<double> yw(keep);
  for (int i = 0; i < keep; ++i) {
    for (int j = 0; j < x.cols; ++j) x_.at(i, j) = x.at(skip + i, j);
    yw[i] = y[skip + i];
  }

  y_mean_ = 0.0;
  for (double v : yw) y_mean_ += v;
  y_mean_ /= keep;
  double var = 0.0;
  for (double v : yw) var += (v - y_mean_) * (v - y_mean_);
  var /= keep;
  degenerate_ = var < 1e-300;
  y_scale_ = degenerate_ ? 1.0 : std::sqrt(var);
  ystd_.resize(keep);
  for (int i = 0; i < keep; ++i) ystd_[i] = (yw[i] - y_mean_) / y_scale_;

  const int dim = x.cols;
  const int np = dim + 3;
  Rng rng(derive_seed(seed, "gp-fit"));

  Hyper best = initial_hyper(dim);
  best_nll_ = nll(best);

  auto pack = [&](const Hyper& h, Tensor& t) {
    for (int d = 0; d < dim; ++d) t.v[d] = h.log_ls[d];
    t.v[dim] = h.log_sf2;
    t.v[dim + 1] = h.log_sn2;
    t.v[dim + 2] = h.mean;
  };
  auto unpack = [&](const Tensor& t) {
    Hyper h;
    h.log_ls.assign(t.v.begin(), t.v.begin() + dim);
    h.log_sf2 = t.v[dim];
    h.log_sn2 = t.v[dim + 1];
    h.mean = t.v[dim + 2];
    return h;
  };

  for (int restart = 0; restart < cfg_.restarts; ++restart) {
    Hyper h0 = initial_hyper(dim);
    if (restart == 1) {
      h0.log_sn2 = std::log(1e-8);  // low-noise start for clean targets
    } else if (restart >= 2) {
      for (int d = 0; d < dim; ++d)
        h0.log_ls[d] = rng.uniform(std::log(0.05), std::log(2.0));
      h0.log_sf2 = rng.uniform(std::log(0.1), std::log(5.0));
      h0.log_sn2 = rng.uniform(std::log(1e-8), std::log(0.1));
    }

    ad::Parameter p("gp-hyper", Tensor(1, np));
    pack(h0, p.value);
    nn::AdamConfig acfg;
    acfg.lr = cfg_.fit_lr;
    nn::Adam opt({&p}, acfg);
    for (int it = 0; it < cfg_.fit_iters; ++it) {
      Hyper h = unpack(p.value);
      NllGrad ng;
      try {
        ng = nll_with_grad(h);
      } catch (const SolverError&) {
        break;  // hopeless corner of hyperparameter space
      }
      if (std::isfinite(ng.value) && ng.value < best_nll_) {
        best_nll_ = ng.value;
        best = h;
      }
      for (int i = 0; i < np; ++i) p.grad.v[i] = ng.grad[i];
      opt.step();
      // Keep log-parameters in a sane box to avoid overflow.
      for (int i = 0; i < np - 1; ++i)
        p.value.v[i] = std::clamp(p.value.v[i], -23.0, 8.0);
    }
    const double final_nll = nll(unpack(p.value));
    if (std::isfinite(final_nll) && final_nll < best_nll_) {
      best_nll_ = final_nll;
      best = unpack(p.value);
    }
  }

  hyp_ = best;
  fitted_ = true;
  factorize();
}

void SurrogateModel::factorize() {
  const int n = x_.rows;
  const double sn2 = cfg_.noise_floor + std::exp(hyp_.log_sn2);
  Tensor k = kernel_matrix(x_, x_, hyp_);
  for (int i = 0; i < n; ++i) k.at(i, i) += sn2;
  double jitter = 0.0;
  for (int attempt = 0;; ++attempt) {
    try {
      Tensor kj = k;
      for (int i = 0; i < n; ++i) kj.at(i, i) += jitter;
      chol_ = linalg::cholesky(kj);
      break;
    } catch (const SolverError&) {
      if (attempt >= 12) throw;
      jitter = jitter == 0.0 ? 1e-12 : jitter * 10.0;
    }
  }
  std::vector<double> resid(n);
  for (int i = 0; i < n; ++i) resid[i] = ystd_[i] - hyp_.mean;
  alpha_ = linalg::chol_solve(chol_, resid);
}

std::pair<std::vector<double>, std::vector<double>> SurrogateModel::posterior(
    const Tensor& xstar) const {
  if (!fitted_) throw NotFitted("gp posterior: model has not been fit");
  if (xstar.cols != x_.cols)
    throw DimensionError("gp posterior: query dimension mismatch");
  const int n = x_.rows;
  const int m = xstar.rows;
  const double sf2 = std::exp(hyp_.log_sf2);

  const Tensor ks = kernel_matrix(xstar, x_, hyp_);
  std::vector<double> mean(m), sd(m);
  std::vector<double> row(n), v(n);
  for (int i = 0; i < m; ++i) {
    double mu = hyp_.mean;
    for (int j = 0; j < n; ++j) {
      row[j] = ks.at(i, j);
      mu += row[j] * alpha_[j];
    }
    // v = L^{-1} k_*; latent var = k** - v'v.
    v = linalg::forward_solve(chol_, row);
    double var = sf2;
    for (int j = 0; j < n; ++j) var -= v[j] * v[j];
    mean[i] = y_mean_ + y_scale_ * mu;
    sd[i] = y_scale_ * std::sqrt(std::max(0.0, var));
  }
  return {mean, sd};
}

}  // namespace coil::gp
