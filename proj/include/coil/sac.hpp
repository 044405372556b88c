#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "coil/nn.hpp"
#include "coil/replay.hpp"
#include "coil/tensor.hpp"

namespace coil::rl {

struct SacConfig {
  int obs_dim = 0;
  int action_dim = 0;
  int xi_dim = 0;  // 0 disables morphology conditioning
  int hidden = 200;  // two hidden layers of 200: three linear layers total
  int hidden_layers = 2;
  double gamma = 0.97;
  double tau = 0.005;
  double lr = 3e-4;
  double q_weight_decay = 1e-5;
  int batch_size = 1024;
  double init_alpha = 0.2;
  double fixed_alpha = -1.0;  // >= 0 pins the entropy coefficient
  double log_std_min = -20.0;
  double log_std_max = 2.0;
  double target_entropy_scale = 1.0;  // target = -scale * action_dim
};

// Minibatch with morphology already concatenated onto the observations.
struct Batch {
  Tensor s{0, 0};        // n x (obs + xi)
  Tensor a{0, 0};        // n x action
  Tensor r{0, 0};        // n x 1
  Tensor s_next{0, 0};   // n x (obs + xi)
  Tensor not_done{0, 0}; // n x 1
  int n = 0;
};

Batch assemble_batch(const ReplayBuffer& buffer,
                     const std::vector<std::size_t>& indices);

// Gaussian prior over actions evaluated against the squashed policy mean;
// produced by the imitation layer's inverse-dynamics model.
struct PriorBatch {
  Tensor mean{0, 0};  // n x action, in [-1, 1]
  double sigma = 1.0;
  double weight = 1.0;
};

class SacAgent {
 public:
  SacAgent(SacConfig cfg, std::uint64_t seed);

  std::vector<double> act(const std::vector<double>& obs,
                          const std::vector<double>& xi_norm,
                          bool deterministic);

  double q_update(const Batch& batch);
  double policy_update(const Batch& batch,
                       const PriorBatch* prior = nullptr);
  void soft_update();

  double alpha() const;
  const SacConfig& config() const { return cfg_; }

  nn::Mlp& policy() { return policy_; }
  nn::Mlp& q1() { return q1_; }
  nn::Mlp& q2() { return q2_; }
  nn::Mlp& q1_target() { return q1_target_; }
  nn::Mlp& q2_target() { return q2_target_; }

  nn::Checkpoint checkpoint() const;
  void restore(const nn::Checkpoint& ck);

 private:
  struct Head {
    Tensor mean;
    Tensor log_std;
  };
  Head policy_head(const Tensor& out) const;
  void sample_squashed(const Tensor& input, Tensor* action,
                       std::vector<double>* log_prob);

  SacConfig cfg_;
  nn::Mlp policy_;
  nn::Mlp q1_, q2_;
  nn::Mlp q1_target_, q2_target_;
  ad::Parameter log_alpha_;
  nn::Adam opt_policy_;
  nn::Adam opt_q_;
  nn::Adam opt_alpha_;
  Rng act_rng_;
  Rng update_rng_;
};

}  // namespace coil::rl
