#pragma once

#include <utility>
#include <vector>

#include "coil/errors.hpp"
#include "coil/tensor.hpp"

namespace coil::gp {

// Matern-5/2 with per-dimension lengthscales; sf2 is the signal variance.
double matern52(const double* a, const double* b, int dim, const double* ls,
                double sf2);

struct Hyper {
  std::vector<double> log_ls;
  double log_sf2 = 0.0;
  double log_sn2 = 0.0;  // noise variance = floor + exp(log_sn2)
  double mean = 0.0;
};

struct GpConfig {
  int window = 200;
  int restarts = 6;
  int fit_iters = 120;
  double fit_lr = 0.05;
  double noise_floor = 1e-10;
};

// Exact GP regression with a constant mean, fit by multi-start gradient
// descent on the negative marginal log-likelihood.  Inputs are expected in
// the unit cube; targets are standardized internally.
class SurrogateModel {
 public:
  explicit SurrogateModel(GpConfig cfg = {}) : cfg_(cfg) {}

  void fit(const Tensor& x, const std::vector<double>& y,
           unsigned long long seed);

  // Predictive mean and (latent, noise-free) standard deviation per row.
  std::pair<std::vector<double>, std::vector<double>> posterior(
      const Tensor& xstar) const;

  bool fitted() const { return fitted_; }
  bool degenerate_targets() const { return degenerate_; }
  int training_size() const { return x_.rows; }
  const Hyper& hyper() const { return hyp_; }
  const GpConfig& config() const { return cfg_; }
  double target_mean() const { return y_mean_; }
  double target_scale() const { return y_scale_; }

  struct NllGrad {
    double value;
    std::vector<double> grad;  // layout: log_ls[0..d), log_sf2, log_sn2, mean
  };
  // Negative MLL of the stored (standardized) training window at h.
  double nll(const Hyper& h) const;
  NllGrad nll_with_grad(const Hyper& h) const;
  double fitted_nll() const { return best_nll_; }

  static Hyper initial_hyper(int dim);

 private:
  Tensor kernel_matrix(const Tensor& a, const Tensor& b, const Hyper& h) const;
  void factorize();

  GpConfig cfg_;
  Tensor x_{0, 0};
  std::vector<double> ystd_;  // standardized targets
  double y_mean_ = 0.0;
  double y_scale_ = 1.0;
  Hyper hyp_;
  double best_nll_ = 0.0;
  bool fitted_ = false;
  bool degenerate_ = false;

  // Cached factorization of K at the fitted hyperparameters.
  Tensor chol_{0, 0};
  std::vector<double> alpha_;
};

}  // namespace coil::gp
