#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace coil::cfg {

// Full experiment description, defaulted to the shared hyper-parameter set.
// Parsed from a sectioned key=value file; every key is validated and
// unknown keys are rejected with the offending name.
struct ExperimentConfig {
  struct Run {
    std::string env = "chain3";
    std::string algo = "sail";          // gail | sail
    std::string strategy = "bo";        // fixed|random|bo|cmaes|q_pso
    std::uint64_t seed = 1;
    long max_steps = 300000;
    int episodes_per_morphology = 20;
    int start_steps = 1000;             // uniform-random warmup actions
    int eval_episodes = 10;
    int subsample = 500;                // per-distribution cap for distances
    bool relabel_rewards = false;       // refresh stored rewards each episode
    std::string output_dir = "runs";
  } run;

  struct Sac {
    double gamma = 0.97;
    double tau = 0.005;
    double lr = 3e-4;
    int batch_size = 1024;
    int hidden = 200;
    int hidden_layers = 2;
    double init_alpha = 0.2;
    double fixed_alpha = -1.0;  // < 0 = automatic entropy tuning
    long replay_capacity = 1000000;
    double q_weight_decay = 1e-5;
    int updates_per_step = 1;
  } sac;

  struct Imitation {
    int hidden = 200;
    int hidden_layers = 2;
    double lr = 3e-4;
    double weight_decay = 1e-5;
    double grad_penalty = 10.0;
    int vae_latent = 8;
    double vae_beta = 0.2;
    double vae_scaler = 1.0;   // weight of the policy prior in the SAC loss
    double prior_sigma = 1.0;
    int pretrain_steps = 10000;
    bool recenter_reward = false;
  } imitation;

  struct Morphology {
    double beta = 2.0;   // confidence-bound width
    int grid_size = 2048;
    int gp_window = 200;
    int gp_restarts = 6;
    std::vector<double> fixed_lengths;  // strategy=fixed override
    int pso_particles = 250;
    int pso_iters = 250;
    long epsilon_decay_steps = 1000000;
  } morphology;

  struct EnvOverrides {
    std::optional<int> episode_length;
    std::optional<double> torque_limit;
    std::optional<double> joint_damping;
    std::optional<double> gravity;
    std::optional<double> dt;
    std::optional<int> substeps;
    std::optional<double> reset_noise;
  } env;
};

ExperimentConfig parse_config(const std::string& path);
ExperimentConfig parse_config_text(const std::string& text,
                                   const std::string& origin);

}  // namespace coil::cfg
