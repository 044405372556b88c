#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "coil/config.hpp"
#include "coil/features.hpp"
#include "coil/sac.hpp"
#include "coil/sim/env.hpp"
#include "coil/transport.hpp"

namespace coil {

// Named environment family with the config's overrides applied.
sim::EnvSpec spec_from_config(const cfg::ExperimentConfig& config);

// Network dimensions and hyper-parameters for an agent acting in `env`.
rl::SacConfig sac_config_for(const cfg::ExperimentConfig& config,
                             const sim::Environment& env);

struct EvalReport {
  std::vector<double> distances;  // one per evaluation episode
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation over episodes
  sim::MorphologyVector morphology;
  std::uint64_t seed = 0;
  double wall_seconds = 0.0;
};

struct RunResult {
  sim::MorphologyVector best_morphology;   // lowest mean episode distance
  double best_target = 0.0;
  sim::MorphologyVector final_morphology;  // body in use when the budget ran out
  long steps = 0;
  int episodes = 0;
  int failed_episodes = 0;          // integrator blowups, logged as NaN rows
  int completed_morphologies = 0;
  std::string metric_path;
  std::string checkpoint_path;      // final agent checkpoint
};

// Co-imitation training loop: blocks of episodes_per_morphology imitation
// episodes alternate with morphology proposals from the configured strategy.
// Replay is shared across bodies; rewards are computed by the discriminator
// when a transition is stored. Writes an append-only metric log plus a
// checkpoint at every morphology switch under the config's output directory.
RunResult run(const cfg::ExperimentConfig& config,
              const std::vector<features::FeatureTrajectory>& demos);

// Deterministic-policy evaluation at a fixed morphology: per-episode exact
// distribution distance between the episode's position features and the
// pooled demonstration features, both capped by `subsample_cap`.
EvalReport evaluate(rl::SacAgent& agent, const sim::EnvSpec& spec,
                    const sim::MorphologyVector& xi,
                    const std::vector<features::FeatureTrajectory>& demos,
                    int episodes, std::uint64_t seed,
                    int subsample_cap = transport::kDefaultSubsampleCap);

struct DemoGenConfig {
  long budget_steps = 100000;
  int episodes = 10;       // recorded demonstrations
  int start_steps = 1000;  // uniform-random warmup actions
  int probe_episodes = 5;  // competence comparison rollouts per side
  double control_cost = 0.1;
  double competence_factor = 5.0;  // expert must beat random by this factor
  cfg::ExperimentConfig::Sac sac;
};

// Task reward used to train the demonstration expert: forward progress for
// floating bases, staying upright for early-termination tasks, swing-up
// height for fixed bases. Control cost is subtracted in every case.
double task_reward(const sim::Environment& env, const sim::SimState& before,
                   const sim::SimState& after,
                   const std::vector<double>& action, double control_cost);

// Episode-level competence score under the same task notion; used to gate
// demo quality against a uniform-random policy.
double task_progress(const sim::Environment& env,
                     const std::vector<sim::SimState>& episode);

// Trains an expert with the task reward at the default morphology, verifies
// it beats a random policy's task progress by `competence_factor` (else
// ExpertTooWeak), then records deterministic-policy demonstration episodes.
std::vector<features::FeatureTrajectory> generate_demos(
    const sim::EnvSpec& spec, const DemoGenConfig& cfg, std::uint64_t seed);

}  // namespace coil
