#include "coil/coil.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <limits>
#include <memory>
#include <sstream>

#include "coil/errors.hpp"
#include "coil/imitation.hpp"
#include "coil/metrics.hpp"
#include "coil/morphopt.hpp"
#include "coil/replay.hpp"
#include "coil/rng.hpp"

namespace coil {
namespace {

namespace fs = std::filesystem;

features::FeatureVector state_features(const sim::Environment& env,
                                       const sim::SimState& state,
                                       const features::FeatureSchema& schema) {
  const sim::MarkerSet ms = env.markers(state);
  return features::phi(ms, ms.base_vx, ms.base_vy, schema);
}

std::vector<double> uniform_action(int dim, Rng& rng) {
  std::vector<double> a(dim);
  for (double& x : a) x = rng.uniform(-1.0, 1.0);
  return a;
}

double sample_std(const std::vector<double>& xs, double mean) {
  if (xs.size() < 2) return 0.0;
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / (xs.size() - 1));
}

Tensor rows_to_tensor(const std::vector<const std::vector<double>*>& rows) {
  const int n = static_cast<int>(rows.size());
  const int d = static_cast<int>(rows.front()->size());
  Tensor t = Tensor::zeros(n, d);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j) t.at(i, j) = (*rows[i])[j];
  return t;
}

double mean_sq(const std::vector<double>& a) {
  double s = 0.0;
  for (double x : a) s += x * x;
  return a.empty() ? 0.0 : s / a.size();
}

// Tip and anchor of the first limb, for the swing-up notions below.
void first_limb_ends(const sim::MarkerSet& ms, double* pivot_y, double* tip_y) {
  *pivot_y = ms.limbs.front().front().py;
  *tip_y = ms.limbs.front().back().py;
}

double limb0_reach(const sim::Environment& env) {
  const auto& lengths = env.morphology().lengths;
  const int segs = env.spec().segments_per_limb;
  double reach = 0.0;
  for (int i = 0; i < segs && i < static_cast<int>(lengths.size()); ++i)
    reach += lengths[i];
  return std::max(reach, 1e-9);
}

// The demonstrator fixes the schema; the imitator only has to supply enough
// markers per limb. Equality is not required (a 3-segment imitator may track
// a 2-segment demonstrator), compatibility is.
void require_compatible(const features::FeatureSchema& schema,
                        const sim::EnvSpec& spec) {
  if (schema.limbs != spec.limb_count ||
      schema.markers_per_limb < 1 ||
      schema.markers_per_limb > spec.segments_per_limb) {
    std::ostringstream msg;
    msg << "demo schema (limbs " << schema.limbs << ", markers per limb "
        << schema.markers_per_limb << ") cannot be produced by environment '"
        << spec.name << "' (limbs " << spec.limb_count << ", up to "
        << spec.segments_per_limb << " markers per limb)";
    throw SchemaError(msg.str());
  }
}

struct RunPaths {
  std::string metrics;
  std::string base;  // checkpoint stem
};

RunPaths prepare_output(const cfg::ExperimentConfig& config) {
  fs::create_directories(config.run.output_dir);
  std::ostringstream stem;
  stem << config.run.strategy << "_" << config.run.algo << "_seed"
       << config.run.seed;
  const fs::path dir(config.run.output_dir);
  RunPaths p;
  p.base = (dir / stem.str()).string();
  p.metrics = p.base + "_metrics.csv";
  return p;
}

}  // namespace

sim::EnvSpec spec_from_config(const cfg::ExperimentConfig& config) {
  sim::EnvSpec spec = sim::builtin_spec(config.run.env);
  if (config.env.episode_length) spec.episode_length = *config.env.episode_length;
  if (config.env.torque_limit) spec.torque_limit = *config.env.torque_limit;
  if (config.env.joint_damping) spec.joint_damping = *config.env.joint_damping;
  if (config.env.gravity) spec.gravity = *config.env.gravity;
  if (config.env.dt) spec.dt = *config.env.dt;
  if (config.env.substeps) spec.substeps = *config.env.substeps;
  if (config.env.reset_noise) spec.reset_noise = *config.env.reset_noise;
  return spec;
}

rl::SacConfig sac_config_for(const cfg::ExperimentConfig& config,
                             const sim::Environment& env) {
  rl::SacConfig sc;
  sc.obs_dim = env.observation_dim();
  sc.action_dim = env.action_dim();
  sc.xi_dim = env.spec().morphology_dim();
  sc.hidden = config.sac.hidden;
  sc.hidden_layers = config.sac.hidden_layers;
  sc.gamma = config.sac.gamma;
  sc.tau = config.sac.tau;
  sc.lr = config.sac.lr;
  sc.q_weight_decay = config.sac.q_weight_decay;
  sc.batch_size = config.sac.batch_size;
  sc.init_alpha = config.sac.init_alpha;
  sc.fixed_alpha = config.sac.fixed_alpha;
  return sc;
}

RunResult run(const cfg::ExperimentConfig& config,
              const std::vector<features::FeatureTrajectory>& demos) {
  if (demos.empty()) throw EmptyInput("co-imitation needs demonstrations");
  const features::FeatureSchema schema = demos.front().schema;
  for (const auto& d : demos)
    if (!(d.schema == schema))
      throw SchemaError("demonstrations disagree on the feature schema");

  const sim::EnvSpec spec = spec_from_config(config);
  require_compatible(schema, spec);
  const sim::MorphologyBounds bounds = spec.bounds();
  const std::uint64_t seed = config.run.seed;
  const bool use_gail = config.run.algo == "gail";

  sim::MorphologyVector fixed_xi = spec.default_morphology;
  if (!config.morphology.fixed_lengths.empty()) {
    fixed_xi.lengths = config.morphology.fixed_lengths;
    bounds.validate(fixed_xi);
  }
  sim::MorphologyVector xi =
      config.run.strategy == "fixed" ? fixed_xi : spec.default_morphology;

  sim::Environment env = sim::make_env(spec, xi);
  std::vector<double> xi_norm = bounds.normalize(xi);

  rl::SacAgent agent(sac_config_for(config, env), derive_seed(seed, "sac"));
  rl::ReplayBuffer replay(config.sac.replay_capacity);

  const int feat_dim = schema.dim();
  std::unique_ptr<imit::GailDiscriminator> disc;
  std::unique_ptr<imit::SailCritic> critic;
  std::unique_ptr<imit::InverseDynamics> ginv;
  std::unique_ptr<imit::DemoVae> vae;
  imit::PolicyPrior prior;
  if (use_gail) {
    imit::DiscConfig dc;
    dc.feature_dim = feat_dim;
    dc.hidden = config.imitation.hidden;
    dc.hidden_layers = config.imitation.hidden_layers;
    dc.lr = config.imitation.lr;
    dc.weight_decay = config.imitation.weight_decay;
    disc = std::make_unique<imit::GailDiscriminator>(dc,
                                                     derive_seed(seed, "disc"));
  } else {
    imit::CriticConfig cc;
    cc.feature_dim = feat_dim;
    cc.hidden = config.imitation.hidden;
    cc.hidden_layers = config.imitation.hidden_layers;
    cc.lr = config.imitation.lr;
    cc.weight_decay = config.imitation.weight_decay;
    cc.grad_penalty = config.imitation.grad_penalty;
    cc.recenter_reward = config.imitation.recenter_reward;
    critic = std::make_unique<imit::SailCritic>(cc, derive_seed(seed, "disc"));

    imit::InvDynConfig ic;
    ic.obs_dim = env.observation_dim();
    ic.feature_dim = feat_dim;
    ic.action_dim = env.action_dim();
    ic.hidden = config.imitation.hidden;
    ic.hidden_layers = config.imitation.hidden_layers;
    ic.lr = config.imitation.lr;
    ginv = std::make_unique<imit::InverseDynamics>(ic,
                                                   derive_seed(seed, "invdyn"));
    imit::VaeConfig vc;
    vc.feature_dim = feat_dim;
    vc.latent = config.imitation.vae_latent;
    vc.beta = config.imitation.vae_beta;
    vc.hidden = config.imitation.hidden;
    vc.hidden_layers = config.imitation.hidden_layers;
    vc.lr = config.imitation.lr;
    vae = std::make_unique<imit::DemoVae>(vc, derive_seed(seed, "vae"));

    imit::PretrainConfig pc;
    pc.random_steps = config.imitation.pretrain_steps;
    imit::pretrain(*ginv, *vae, env, schema, demos, pc,
                   derive_seed(seed, "pretrain"));
    prior.g_inv = ginv.get();
    prior.f = vae.get();
    prior.sigma = config.imitation.prior_sigma;
    prior.weight = config.imitation.vae_scaler;
  }
  auto imitation_reward = [&](const std::vector<double>& f) {
    return use_gail ? disc->reward(f) : critic->reward(f);
  };
  auto discriminator_update = [&](const Tensor& expert, const Tensor& policy) {
    return use_gail ? disc->update(expert, policy)
                    : critic->update(expert, policy);
  };

  morph::BoConfig bo;
  bo.beta = config.morphology.beta;
  bo.grid_size = config.morphology.grid_size;
  bo.gp.window = config.morphology.gp_window;
  bo.gp.restarts = config.morphology.gp_restarts;
  morph::QPsoStrategy::Config qc;
  qc.particles = config.morphology.pso_particles;
  qc.iters = config.morphology.pso_iters;
  qc.budget_steps = config.morphology.epsilon_decay_steps;
  auto strategy = morph::make_strategy(config.run.strategy, fixed_xi, bo, qc,
                                       derive_seed(seed, "strategy"));
  auto* q_pso = dynamic_cast<morph::QPsoStrategy*>(strategy.get());
  if (q_pso) {
    const std::uint64_t probe_seed = derive_seed(seed, "qpso-reset");
    q_pso->set_objective([&agent, &spec, &bounds,
                          probe_seed](const Tensor& cand) {
      std::vector<double> vals(cand.rows);
      for (int i = 0; i < cand.rows; ++i) {
        std::vector<double> unit(cand.cols);
        for (int d = 0; d < cand.cols; ++d)
          unit[d] = std::clamp(cand.at(i, d), 0.0, 1.0);
        const sim::MorphologyVector cxi = bounds.denormalize(unit);
        const sim::Environment probe = sim::make_env(spec, cxi);
        const sim::SimState s0 = probe.reset(probe_seed);
        const std::vector<double> obs = probe.observation(s0);
        const std::vector<double> act = agent.act(obs, unit, true);
        Tensor qin = Tensor::zeros(
            1, static_cast<int>(obs.size() + unit.size() + act.size()));
        int j = 0;
        for (double v : obs) qin.at(0, j++) = v;
        for (double v : unit) qin.at(0, j++) = v;
        for (double v : act) qin.at(0, j++) = v;
        vals[i] = std::min(agent.q1().forward(qin).at(0, 0),
                           agent.q2().forward(qin).at(0, 0));
      }
      return vals;
    });
  }

  const Tensor expert_pool = imit::stack_features(demos);
  const transport::EmpiricalDistribution demo_ref = transport::subsample(
      demos, config.run.subsample, derive_seed(seed, "demo-ref"));

  const RunPaths paths = prepare_output(config);
  metrics::MetricLogger logger(paths.metrics, config.run.strategy, seed,
                               bounds.size());

  morph::MorphDataset dataset;
  dataset.begin_entry(xi);

  Rng warmup_rng(derive_seed(seed, "warmup"));
  Rng replay_rng(derive_seed(seed, "replay"));
  Rng expert_rng(derive_seed(seed, "expert-batch"));

  const int batch = config.sac.batch_size;
  const int n_xi = config.run.episodes_per_morphology;
  long step = 0;
  int episode = 0;
  int switches = 0;
  int failed_episodes = 0;
  int episodes_this_morph = 0;

  while (step < config.run.max_steps) {
    sim::SimState state = env.reset(derive_seed(seed, "reset", episode));
    std::vector<double> obs = env.observation(state);
    features::FeatureVector feat = state_features(env, state, schema);
    std::vector<features::FeatureVector> ep_feats = {feat};
    double reward_sum = 0.0;
    long reward_count = 0;
    bool failed = false;

    for (int t = 0; t < spec.episode_length; ++t) {
      const std::vector<double> action =
          step < config.run.start_steps
              ? uniform_action(env.action_dim(), warmup_rng)
              : agent.act(obs, xi_norm, false);
      const sim::StepResult sr = env.step(state, action);
      ++step;
      if (sr.state.failed) {
        failed = true;
        break;
      }
      const std::vector<double> next_obs = env.observation(sr.state);
      const features::FeatureVector next_feat =
          state_features(env, sr.state, schema);
      ep_feats.push_back(next_feat);

      rl::TransitionRecord rec;
      rec.s = obs;
      rec.a = action;
      rec.s_next = next_obs;
      rec.xi_norm = xi_norm;
      rec.feat = feat;
      rec.feat_next = next_feat;
      rec.reward = imitation_reward(next_feat);
      rec.done = sr.terminated && !sr.truncated;
      reward_sum += rec.reward;
      ++reward_count;
      replay.add(std::move(rec));

      if (replay.size() >= static_cast<std::size_t>(batch)) {
        std::vector<const std::vector<double>*> prows;
        prows.reserve(batch);
        for (std::size_t idx : replay.sample_indices(batch, replay_rng))
          prows.push_back(&replay.at(idx).feat);
        Tensor expert_batch = Tensor::zeros(batch, feat_dim);
        for (int i = 0; i < batch; ++i) {
          const int r = static_cast<int>(expert_rng.index(expert_pool.rows));
          for (int j = 0; j < feat_dim; ++j)
            expert_batch.at(i, j) = expert_pool.at(r, j);
        }
        discriminator_update(expert_batch, rows_to_tensor(prows));

        for (int u = 0; u < config.sac.updates_per_step; ++u) {
          const auto idx = replay.sample_indices(batch, replay_rng);
          const rl::Batch b = rl::assemble_batch(replay, idx);
          agent.q_update(b);
          if (use_gail) {
            agent.policy_update(b);
          } else {
            Tensor bobs = Tensor::zeros(batch, env.observation_dim());
            Tensor bfeat = Tensor::zeros(batch, feat_dim);
            for (int i = 0; i < batch; ++i) {
              const auto& rrec = replay.at(idx[i]);
              for (int j = 0; j < env.observation_dim(); ++j)
                bobs.at(i, j) = rrec.s[j];
              for (int j = 0; j < feat_dim; ++j)
                bfeat.at(i, j) = rrec.feat[j];
            }
            rl::PriorBatch pb;
            pb.mean = prior.mean(bobs, bfeat);
            pb.sigma = prior.sigma;
            pb.weight = prior.weight;
            agent.policy_update(b, &pb);
          }
          agent.soft_update();
        }
      }

      state = sr.state;
      obs = std::move(next_obs);
      feat = next_feat;
      if (sr.terminated) break;
    }

    double dist = std::numeric_limits<double>::quiet_NaN();
    if (!failed) {
      features::FeatureTrajectory traj;
      traj.schema = schema;
      traj.rows = std::move(ep_feats);
      traj.episode_id = episode;
      traj.source = "imitator";
      traj.morphology = xi.lengths;
      const auto ep_dist = transport::subsample(
          {traj}, config.run.subsample, derive_seed(seed, "subsample", episode));
      dist = transport::wasserstein_exact(ep_dist, demo_ref).first;
    } else {
      ++failed_episodes;
    }
    dataset.add_episode_distance(dist);
    logger.log(step, episode,
               dist, reward_count ? reward_sum / reward_count : 0.0,
               xi.lengths);
    ++episode;
    ++episodes_this_morph;

    if (config.run.relabel_rewards)
      for (std::size_t i = 0; i < replay.size(); ++i)
        replay.at(i).reward = imitation_reward(replay.at(i).feat_next);

    if (episodes_this_morph >= n_xi && step < config.run.max_steps) {
      dataset.complete_entry();
      nn::Checkpoint ck = agent.checkpoint();
      ck.put("run.xi", Tensor::from_row(xi.lengths));
      ck.put("run.step", static_cast<double>(step));
      ck.save_file(paths.base + "_switch" + std::to_string(switches) + ".ckpt");

      if (q_pso) q_pso->set_step_count(step);
      xi = strategy->propose(dataset, bounds);
      bounds.validate(xi);
      env = sim::make_env(spec, xi);
      xi_norm = bounds.normalize(xi);
      dataset.begin_entry(xi);
      episodes_this_morph = 0;
      ++switches;
    }
  }
  if (dataset.has_open_entry()) dataset.complete_entry();

  RunResult result;
  result.final_morphology = xi;
  result.steps = step;
  result.episodes = episode;
  result.failed_episodes = failed_episodes;
  result.completed_morphologies = dataset.completed_count();
  result.metric_path = paths.metrics;
  const auto best = morph::incumbent_best(dataset, bounds);
  if (best) {
    result.best_morphology = best->first;
    result.best_target = best->second;
  } else {
    result.best_morphology = xi;
    result.best_target = std::numeric_limits<double>::quiet_NaN();
  }

  nn::Checkpoint ck = agent.checkpoint();
  ck.put("run.xi", Tensor::from_row(result.best_morphology.lengths));
  ck.put("run.final_xi", Tensor::from_row(xi.lengths));
  ck.put("run.step", static_cast<double>(step));
  result.checkpoint_path = paths.base + "_final.ckpt";
  ck.save_file(result.checkpoint_path);
  return result;
}

EvalReport evaluate(rl::SacAgent& agent, const sim::EnvSpec& spec,
                    const sim::MorphologyVector& xi,
                    const std::vector<features::FeatureTrajectory>& demos,
                    int episodes, std::uint64_t seed, int subsample_cap) {
  if (demos.empty()) throw EmptyInput("evaluation needs demonstrations");
  if (episodes < 1) throw BoundsViolation("need at least one eval episode");
  const auto start = std::chrono::steady_clock::now();
  const features::FeatureSchema schema = demos.front().schema;
  require_compatible(schema, spec);
  const sim::MorphologyBounds bounds = spec.bounds();
  const sim::Environment env = sim::make_env(spec, xi);
  const std::vector<double> xi_norm = bounds.normalize(xi);
  const transport::EmpiricalDistribution demo_ref = transport::subsample(
      demos, subsample_cap, derive_seed(seed, "eval-demo-ref"));

  EvalReport report;
  report.morphology = xi;
  report.seed = seed;
  for (int e = 0; e < episodes; ++e) {
    sim::SimState state = env.reset(derive_seed(seed, "eval-reset", e));
    std::vector<sim::SimState> states = {state};
    for (int t = 0; t < spec.episode_length; ++t) {
      const auto action =
          agent.act(env.observation(state), xi_norm, true);
      const sim::StepResult sr = env.step(state, action);
      if (sr.state.failed) break;
      states.push_back(sr.state);
      state = sr.state;
      if (sr.terminated) break;
    }
    features::FeatureTrajectory traj =
        features::phi_trajectory(states, env, schema);
    const auto ep_dist = transport::subsample(
        {traj}, subsample_cap, derive_seed(seed, "eval-subsample", e));
    report.distances.push_back(
        transport::wasserstein_exact(ep_dist, demo_ref).first);
  }
  double sum = 0.0;
  for (double d : report.distances) sum += d;
  report.mean = sum / report.distances.size();
  report.stddev = sample_std(report.distances, report.mean);
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  return report;
}

double task_reward(const sim::Environment& env, const sim::SimState& before,
                   const sim::SimState& after,
                   const std::vector<double>& action, double control_cost) {
  const double ctrl = control_cost * mean_sq(action);
  const sim::EnvSpec& spec = env.spec();
  if (spec.base == sim::BaseKind::Fixed) {
    double pivot_y = 0.0, tip_y = 0.0;
    first_limb_ends(env.markers(after), &pivot_y, &tip_y);
    return (tip_y - pivot_y) / limb0_reach(env) - ctrl;
  }
  if (spec.early_termination) return 1.0 - ctrl;
  return (env.base_x(after) - env.base_x(before)) / spec.dt - ctrl;
}

double task_progress(const sim::Environment& env,
                     const std::vector<sim::SimState>& episode) {
  if (episode.empty()) return 0.0;
  const sim::EnvSpec& spec = env.spec();
  if (spec.base == sim::BaseKind::Fixed) {
    double acc = 0.0;
    for (const auto& st : episode) {
      double pivot_y = 0.0, tip_y = 0.0;
      first_limb_ends(env.markers(st), &pivot_y, &tip_y);
      acc += std::max(0.0, (tip_y - pivot_y) / limb0_reach(env));
    }
    return acc / episode.size();
  }
  if (spec.early_termination)
    return static_cast<double>(episode.size()) / (spec.episode_length + 1);
  return std::abs(env.base_x(episode.back()) - env.base_x(episode.front()));
}

std::vector<features::FeatureTrajectory> generate_demos(
    const sim::EnvSpec& spec, const DemoGenConfig& cfg, std::uint64_t seed) {
  const sim::Environment env = sim::make_env(spec, spec.default_morphology);
  const features::FeatureSchema schema = features::schema_for_env(spec);

  rl::SacConfig sc;
  sc.obs_dim = env.observation_dim();
  sc.action_dim = env.action_dim();
  sc.xi_dim = 0;  // the expert's body never changes
  sc.hidden = cfg.sac.hidden;
  sc.hidden_layers = cfg.sac.hidden_layers;
  sc.gamma = cfg.sac.gamma;
  sc.tau = cfg.sac.tau;
  sc.lr = cfg.sac.lr;
  sc.q_weight_decay = cfg.sac.q_weight_decay;
  sc.batch_size = cfg.sac.batch_size;
  sc.init_alpha = cfg.sac.init_alpha;
  sc.fixed_alpha = cfg.sac.fixed_alpha;
  rl::SacAgent agent(sc, derive_seed(seed, "demo-sac"));
  rl::ReplayBuffer replay(cfg.sac.replay_capacity);

  Rng warmup_rng(derive_seed(seed, "demo-warmup"));
  Rng replay_rng(derive_seed(seed, "demo-replay"));
  const int batch = cfg.sac.batch_size;

  long step = 0;
  int episode = 0;
  while (step < cfg.budget_steps) {
    sim::SimState state = env.reset(derive_seed(seed, "demo-reset", episode));
    std::vector<double> obs = env.observation(state);
    for (int t = 0; t < spec.episode_length; ++t) {
      const std::vector<double> action =
          step < cfg.start_steps ? uniform_action(env.action_dim(), warmup_rng)
                                 : agent.act(obs, {}, false);
      const sim::StepResult sr = env.step(state, action);
      ++step;
      if (sr.state.failed) break;

      rl::TransitionRecord rec;
      rec.s = obs;
      rec.a = action;
      rec.s_next = env.observation(sr.state);
      rec.reward = task_reward(env, state, sr.state, action, cfg.control_cost);
      rec.done = sr.terminated && !sr.truncated;
      replay.add(std::move(rec));

      if (replay.size() >= static_cast<std::size_t>(batch)) {
        for (int u = 0; u < cfg.sac.updates_per_step; ++u) {
          const rl::Batch b = rl::assemble_batch(
              replay, replay.sample_indices(batch, replay_rng));
          agent.q_update(b);
          agent.policy_update(b);
          agent.soft_update();
        }
      }

      state = sr.state;
      obs = env.observation(state);
      if (sr.terminated) break;
    }
    ++episode;
  }

  // Competence gate: the expert must clearly outperform a uniform-random
  // policy on the task-progress notion before its episodes count as
  // demonstrations.
  auto rollout = [&](std::uint64_t reset_seed, Rng* random_actions) {
    sim::SimState state = env.reset(reset_seed);
    std::vector<sim::SimState> states = {state};
    for (int t = 0; t < spec.episode_length; ++t) {
      const std::vector<double> action =
          random_actions ? uniform_action(env.action_dim(), *random_actions)
                         : agent.act(env.observation(state), {}, true);
      const sim::StepResult sr = env.step(state, action);
      if (sr.state.failed) break;
      states.push_back(sr.state);
      state = sr.state;
      if (sr.terminated) break;
    }
    return states;
  };

  Rng probe_rng(derive_seed(seed, "demo-probe-actions"));
  double expert_score = 0.0;
  double random_score = 0.0;
  for (int i = 0; i < cfg.probe_episodes; ++i) {
    const std::uint64_t rs = derive_seed(seed, "demo-probe", i);
    expert_score += task_progress(env, rollout(rs, nullptr));
    random_score += task_progress(env, rollout(rs, &probe_rng));
  }
  expert_score /= cfg.probe_episodes;
  random_score /= cfg.probe_episodes;
  if (!(expert_score > cfg.competence_factor * random_score)) {
    std::ostringstream msg;
    msg << "expert task progress " << expert_score << " does not beat "
        << cfg.competence_factor << " x random (" << random_score
        << ") on " << spec.name << "; trained for " << step << " steps";
    throw ExpertTooWeak(msg.str());
  }

  std::vector<features::FeatureTrajectory> demos;
  demos.reserve(cfg.episodes);
  for (int i = 0; i < cfg.episodes; ++i) {
    const auto states = rollout(derive_seed(seed, "demo-episode", i), nullptr);
    features::FeatureTrajectory t =
        features::phi_trajectory(states, env, schema);
    t.episode_id = i;
    t.source = "expert";
    demos.push_back(std::move(t));
  }
  return demos;
}

}  // namespace coil
