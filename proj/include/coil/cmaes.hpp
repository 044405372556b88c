#pragma once

#include <cstdint>
#include <vector>

#include "coil/rng.hpp"
#include "coil/tensor.hpp"

namespace coil::opt {

// (mu/mu_w, lambda) CMA-ES minimizer over the unit cube. ask() yields a
// population (clipped to bounds), tell() consumes their fitnesses. Step-size
// control is cumulative (CSA); covariance adaptation combines the rank-1 and
// rank-mu updates.
class Cmaes {
 public:
  Cmaes(int dim, std::uint64_t seed, double sigma0 = 0.3);

  int dim() const { return dim_; }
  int population() const { return lambda_; }
  int generation() const { return generation_; }
  double sigma() const { return sigma_; }
  const std::vector<double>& mean() const { return mean_; }
  const Tensor& covariance() const { return c_; }

  Tensor ask();
  void tell(const Tensor& xs, const std::vector<double>& fitness);

  const std::vector<double>& best_point() const { return best_x_; }
  double best_fitness() const { return best_f_; }

 private:
  void decompose();

  int dim_;
  int lambda_;
  int mu_;
  std::vector<double> weights_;
  double mu_eff_;
  double cc_, cs_, c1_, cmu_, damps_, chi_n_;

  std::vector<double> mean_;
  double sigma_;
  Tensor c_;
  Tensor b_;
  std::vector<double> d_;
  std::vector<double> ps_, pc_;
  int generation_ = 0;
  Rng rng_;

  std::vector<double> best_x_;
  double best_f_;
};

}  // namespace coil::opt
