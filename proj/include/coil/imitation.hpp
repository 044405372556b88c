#pragma once

#include <cstdint>
#include <vector>

#include "coil/features.hpp"
#include "coil/nn.hpp"
#include "coil/rng.hpp"
#include "coil/sim/env.hpp"
#include "coil/tensor.hpp"

namespace coil::imit {

struct DiscConfig {
  int feature_dim = 0;
  int hidden = 200;
  int hidden_layers = 2;
  double lr = 3e-4;
  double weight_decay = 1e-5;
};

// Logistic-loss discriminator over feature vectors. Rewards are the
// pre-sigmoid logit, clamped so the implied probability stays inside
// [1e-6, 1 - 1e-6].
class GailDiscriminator {
 public:
  GailDiscriminator(DiscConfig cfg, std::uint64_t seed);

  // One classifier step: expert rows labelled 1, policy rows 0.
  double update(const Tensor& expert, const Tensor& policy);

  double logit(const std::vector<double>& feat) const;
  double reward(const std::vector<double>& feat) const;

  nn::Mlp& net() { return net_; }

 private:
  DiscConfig cfg_;
  nn::Mlp net_;
  nn::Adam opt_;
};

struct CriticConfig {
  int feature_dim = 0;
  int hidden = 200;
  int hidden_layers = 2;
  double lr = 3e-4;
  double weight_decay = 1e-5;
  double grad_penalty = 10.0;
  bool recenter_reward = false;  // subtract a running mean from rewards
};

// Wasserstein-style critic: maximizes mean score on expert features minus
// mean score on policy features, kept near 1-Lipschitz by a gradient
// penalty on interpolated samples.
class SailCritic {
 public:
  SailCritic(CriticConfig cfg, std::uint64_t seed);

  double update(const Tensor& expert, const Tensor& policy);

  double value(const std::vector<double>& feat) const;
  double reward(const std::vector<double>& feat);

  // d critic / d input, one row per sample; exact for the piecewise-linear
  // ReLU network away from activation boundaries.
  Tensor input_gradients(const Tensor& x) const;
  double gradient_penalty(const Tensor& x) const;

  nn::Mlp& net() { return net_; }

 private:
  CriticConfig cfg_;
  nn::Mlp net_;
  nn::Adam opt_;
  Rng rng_;
  double reward_center_ = 0.0;
  bool center_init_ = false;
};

struct InvDynConfig {
  int obs_dim = 0;
  int feature_dim = 0;  // width of the target feature appended to the state
  int action_dim = 0;
  int hidden = 200;
  int hidden_layers = 2;
  double lr = 3e-4;
};

// Inverse dynamics: (state, feature of the next state) -> action that made
// the transition. Trained on random-action rollouts, queried by the policy
// prior with a denoised feature target instead of a real next state.
class InverseDynamics {
 public:
  InverseDynamics(InvDynConfig cfg, std::uint64_t seed);

  double update(const Tensor& obs, const Tensor& target_feat,
                const Tensor& actions);
  Tensor predict(const Tensor& obs, const Tensor& target_feat) const;

  bool pretrained() const { return pretrained_; }
  void mark_pretrained() { pretrained_ = true; }
  nn::Mlp& net() { return net_; }
  const InvDynConfig& config() const { return cfg_; }

 private:
  InvDynConfig cfg_;
  nn::Mlp net_;
  nn::Adam opt_;
  bool pretrained_ = false;
};

struct VaeConfig {
  int feature_dim = 0;
  int latent = 8;
  double beta = 0.2;
  int hidden = 200;
  int hidden_layers = 2;
  double lr = 3e-4;
};

// Beta-VAE over demonstration features; its deterministic reconstruction
// maps an arbitrary feature vector toward the demonstration manifold.
class DemoVae {
 public:
  DemoVae(VaeConfig cfg, std::uint64_t seed);

  double update(const Tensor& feats);
  Tensor reconstruct(const Tensor& feats) const;
  double reconstruction_error(const Tensor& feats) const;

  bool pretrained() const { return pretrained_; }
  void mark_pretrained() { pretrained_ = true; }
  nn::Mlp& encoder() { return enc_; }
  nn::Mlp& decoder() { return dec_; }
  const VaeConfig& config() const { return cfg_; }

 private:
  VaeConfig cfg_;
  nn::Mlp enc_;
  nn::Mlp dec_;
  nn::Adam opt_;
  Rng rng_;
  bool pretrained_ = false;
};

// Gaussian action prior centred at g_inv(s, f(phi(s))): the action the
// inverse dynamics model would use to move toward the demonstration
// manifold. `weight` balances the prior against the usual policy loss.
struct PolicyPrior {
  InverseDynamics* g_inv = nullptr;
  DemoVae* f = nullptr;
  double sigma = 1.0;
  double weight = 1.0;

  // One action-space mean per row, clipped to [-1, 1].
  Tensor mean(const Tensor& obs, const Tensor& feat) const;
};

struct PretrainConfig {
  int random_steps = 10000;
  int batch = 256;
  int max_epochs = 200;
  int plateau_epochs = 10;    // stop after this many epochs whose improvement
  double plateau_tol = 1e-3;  // over the best loss stays below this fraction
};

struct PretrainStats {
  int transitions = 0;
  int inv_epochs = 0;
  int vae_epochs = 0;
  double inv_loss = 0.0;
  double vae_loss = 0.0;
};

// Random-action phase: rolls the environment with uniform actions to fit
// the inverse dynamics model, then fits the VAE on demonstration features.
// Both run until their loss plateaus.
PretrainStats pretrain(InverseDynamics& g_inv, DemoVae& vae,
                       const sim::Environment& env,
                       const features::FeatureSchema& schema,
                       const std::vector<features::FeatureTrajectory>& demos,
                       const PretrainConfig& cfg, std::uint64_t seed);

Tensor stack_features(const std::vector<features::FeatureTrajectory>& demos);

}  // namespace coil::imit
