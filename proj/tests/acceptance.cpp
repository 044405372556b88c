// Acceptance gate. Each numbered criterion prints one [PASS]/[FAIL] line
// with its measured margin; the process exits nonzero if any fail. The
// tolerances are pinned right next to the checks on purpose. Criterion 8
// (morphology recovery) trains for hours and lives in acceptance_long.cpp.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "coil/coil.hpp"
#include "coil/config.hpp"
#include "coil/demo_io.hpp"
#include "coil/imitation.hpp"
#include "coil/linalg.hpp"
#include "coil/lowdisc.hpp"
#include "coil/metrics.hpp"
#include "coil/morphopt.hpp"
#include "coil/nn.hpp"
#include "coil/replay.hpp"
#include "coil/rng.hpp"
#include "coil/sac.hpp"
#include "coil/tape.hpp"
#include "coil/transport.hpp"
#include "oracles.hpp"

using namespace coil;
namespace fs = std::filesystem;

namespace {

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

int failures = 0;

template <typename Fn>
void criterion(int idx, const char* name, Fn&& fn) {
  const auto t0 = std::chrono::steady_clock::now();
  bool ok = false;
  std::string detail;
  try {
    ok = fn(detail);
  } catch (const std::exception& e) {
    detail = fmt("exception: %s", e.what());
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  std::printf("[%s] %2d %-22s %s (%.1fs)\n", ok ? "PASS" : "FAIL", idx, name,
              detail.c_str(), secs);
  std::fflush(stdout);
  if (!ok) ++failures;
}

const fs::path kTmp = "acceptance_tmp";

// ---------------------------------------------------------------- criterion 1

bool transport_oracle(std::string& detail) {
  Rng rng(314159);
  auto draw = [&](int n) {
    transport::EmpiricalDistribution e;
    for (int i = 0; i < n; ++i)
      e.points.push_back({rng.uniform(-1, 1), rng.uniform(-1, 1),
                          rng.uniform(-1, 1)});
    return e;
  };
  double worst = 0.0;
  for (int t = 0; t < 200; ++t) {
    const int n = 1 + static_cast<int>(rng.index(7));
    const auto a = draw(n);
    const auto b = draw(n);
    const double oracle = oracles::brute_force_matching(a.points, b.points);
    const auto [d, plan] = transport::wasserstein_exact(a, b);
    worst = std::max(worst,
                     std::fabs(d - oracle) / std::max(1.0, std::fabs(oracle)));
  }
  detail = fmt("200 instances vs permutation oracle, worst rel err %.2e",
               worst);
  return worst < 1e-9;
}

// ---------------------------------------------------------------- criterion 2

bool autodiff_gradients(std::string& detail) {
  Rng rng(271828);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const int in = 1 + static_cast<int>(rng.index(5));
    const int hid = 2 + static_cast<int>(rng.index(8));
    const int out = 1 + static_cast<int>(rng.index(3));
    std::vector<int> sizes = {in, hid, out};
    if (rng.index(2)) sizes.insert(sizes.begin() + 2, hid);
    // Tanh keeps the loss smooth so central differences are valid everywhere.
    nn::Mlp net("n", sizes, nn::Activation::Tanh, 5000 + trial);
    const int batch = 2 + static_cast<int>(rng.index(4));
    Tensor x(batch, in), target(batch, out);
    x.fill_uniform(rng, -1.5, 1.5);
    target.fill_uniform(rng, -1.0, 1.0);

    auto loss_value = [&]() {
      ad::Tape tape;
      auto pred = net.forward_tape(tape, tape.constant(x));
      auto loss =
          tape.mean_all(tape.square(tape.sub(pred, tape.constant(target))));
      return tape.value(loss).v[0];
    };
    net.zero_grad();
    {
      ad::Tape tape;
      auto pred = net.forward_tape(tape, tape.constant(x));
      auto loss =
          tape.mean_all(tape.square(tape.sub(pred, tape.constant(target))));
      tape.backward(loss);
    }
    std::vector<double> grad;
    for (auto* p : net.params())
      grad.insert(grad.end(), p->grad.v.begin(), p->grad.v.end());

    auto flatten = [&]() {
      std::vector<double> flat;
      for (auto* p : net.params())
        flat.insert(flat.end(), p->value.v.begin(), p->value.v.end());
      return flat;
    };
    auto unflatten = [&](const std::vector<double>& flat) {
      size_t k = 0;
      for (auto* p : net.params())
        for (double& v : p->value.v) v = flat[k++];
    };
    const auto base = flatten();
    const auto fd = oracles::finite_difference(
        [&](const std::vector<double>& flat) {
          unflatten(flat);
          return loss_value();
        },
        base);
    unflatten(base);
    for (size_t i = 0; i < grad.size(); ++i)
      worst = std::max(worst, std::fabs(grad[i] - fd[i]) /
                                  std::max(1.0, std::fabs(fd[i])));
  }
  detail = fmt("100 MLPs vs central differences, worst rel err %.2e", worst);
  return worst < 1e-4;
}

// ---------------------------------------------------------------- criterion 3

bool gp_correctness(std::string& detail) {
  auto column = [](const std::vector<double>& xs) {
    Tensor t(static_cast<int>(xs.size()), 1);
    for (size_t i = 0; i < xs.size(); ++i) t.at(static_cast<int>(i), 0) = xs[i];
    return t;
  };

  // Noise-free smooth targets must be interpolated at the training inputs.
  Rng rng(161803);
  double interp_worst = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 5 + static_cast<int>(rng.index(5));
    const double a = rng.uniform(1.0, 4.0);
    const double b = rng.uniform(-1.0, 1.0);
    const double c = rng.uniform(-0.5, 0.5);
    std::vector<double> xs, ys;
    for (int i = 0; i < n; ++i) {
      const double x = (i + rng.uniform(0.1, 0.9)) / n;
      xs.push_back(x);
      ys.push_back(std::sin(a * x + b) + c * x);
    }
    gp::SurrogateModel m;
    m.fit(column(xs), ys, 400 + trial);
    const auto [mean, sd] = m.posterior(column(xs));
    for (int i = 0; i < n; ++i)
      interp_worst = std::max(interp_worst, std::fabs(mean[i] - ys[i]));
  }

  // Posterior against a dense pivoted-solve oracle on the fitted
  // hyperparameters, entirely outside the model's Cholesky path.
  const std::vector<double> xs = {0.15, 0.5, 0.85};
  const std::vector<double> ys = {0.9, -0.4, 0.3};
  gp::SurrogateModel m;
  m.fit(column(xs), ys, 77);
  const gp::Hyper& h = m.hyper();
  const double ls = std::exp(h.log_ls[0]);
  const double sf2 = std::exp(h.log_sf2);
  const double sn2 = m.config().noise_floor + std::exp(h.log_sn2);
  double ymean = 0.0, yvar = 0.0;
  for (double y : ys) ymean += y;
  ymean /= 3.0;
  for (double y : ys) yvar += (y - ymean) * (y - ymean);
  const double yscale = std::sqrt(yvar / 3.0);
  Tensor k(3, 3);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      k.at(i, j) = gp::matern52(&xs[i], &xs[j], 1, &ls, sf2);
      if (i == j) k.at(i, j) += sn2;
    }
  std::vector<double> resid(3);
  for (int i = 0; i < 3; ++i) resid[i] = (ys[i] - ymean) / yscale - h.mean;
  const std::vector<double> alpha = linalg::solve(k, resid);
  const std::vector<double> queries = {0.05, 0.33, 0.7, 0.95};
  const auto [mean, sd] = m.posterior(column(queries));
  double oracle_worst = 0.0;
  for (size_t qi = 0; qi < queries.size(); ++qi) {
    std::vector<double> kstar(3);
    for (int i = 0; i < 3; ++i)
      kstar[i] = gp::matern52(&queries[qi], &xs[i], 1, &ls, sf2);
    double mu = h.mean;
    for (int i = 0; i < 3; ++i) mu += kstar[i] * alpha[i];
    const std::vector<double> kik = linalg::solve(k, kstar);
    double var = sf2;
    for (int i = 0; i < 3; ++i) var -= kstar[i] * kik[i];
    oracle_worst = std::max(
        oracle_worst, std::fabs(mean[qi] - (ymean + yscale * mu)));
    oracle_worst = std::max(
        oracle_worst,
        std::fabs(sd[qi] - yscale * std::sqrt(std::max(0.0, var))));
  }

  // Fitting may never end above the starting negative log marginal
  // likelihood (the minimized objective).
  int mll_bad = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const int dim = 1 + static_cast<int>(rng.index(3));
    const int n = 4 + static_cast<int>(rng.index(17));
    Tensor x(n, dim);
    std::vector<double> y(n);
    for (int i = 0; i < n; ++i) {
      for (int d = 0; d < dim; ++d) x.at(i, d) = rng.uniform(0.0, 1.0);
      y[i] = rng.normal(0.0, 1.0 + 0.05 * trial);
    }
    gp::SurrogateModel g;
    g.fit(x, y, 900 + trial);
    if (g.fitted_nll() > g.nll(gp::SurrogateModel::initial_hyper(dim)) + 1e-12)
      ++mll_bad;
  }

  detail = fmt(
      "interp err %.2e, 3-point oracle err %.2e, fit raised NLL on %d/50",
      interp_worst, oracle_worst, mll_bad);
  return interp_worst < 1e-6 && oracle_worst < 1e-8 && mll_bad == 0;
}

// ---------------------------------------------------------------- criterion 4

bool lcb_contract(std::string& detail) {
  sim::MorphologyBounds bounds;
  bounds.lower = {0.0, 0.0};
  bounds.upper = {1.0, 1.0};
  morph::MorphDataset ds;
  Rng rng(555);
  for (int i = 0; i < 6; ++i) {
    sim::MorphologyVector xi;
    xi.lengths = {rng.uniform(0.05, 0.95), rng.uniform(0.05, 0.95)};
    const double f = std::pow(xi.lengths[0] - 0.3, 2.0) +
                     std::pow(xi.lengths[1] - 0.6, 2.0);
    ds.add_completed(xi, {f, f + 0.01 * rng.normal(), f + 0.01 * rng.normal()});
  }

  morph::BoConfig cfg;
  cfg.beta = 0.0;
  cfg.grid_size = 256;
  morph::BoStrategy strat(cfg, 31);
  const sim::MorphologyVector proposed = strat.propose(ds, bounds);

  // Rebuild the strategy's candidate set for this round: fresh
  // low-discrepancy grid plus every evaluated point.
  const morph::Targets t = morph::targets(ds, bounds);
  const Tensor halton =
      lowdisc::scrambled_halton(cfg.grid_size, 2, derive_seed(31, "bo-grid", 0));
  Tensor grid(halton.rows + t.x.rows, 2);
  for (int i = 0; i < halton.rows; ++i)
    for (int d = 0; d < 2; ++d) grid.at(i, d) = halton.at(i, d);
  for (int i = 0; i < t.x.rows; ++i)
    for (int d = 0; d < 2; ++d) grid.at(halton.rows + i, d) = t.x.at(i, d);
  const auto [mean, sd] = strat.last_model()->posterior(grid);

  int argmin = 0;
  for (int i = 1; i < grid.rows; ++i)
    if (mean[i] < mean[argmin]) argmin = i;
  const sim::MorphologyVector expect =
      bounds.denormalize({grid.at(argmin, 0), grid.at(argmin, 1)});
  double prop_err = 0.0;
  for (int d = 0; d < 2; ++d)
    prop_err = std::max(
        prop_err, std::fabs(proposed.lengths[d] - expect.lengths[d]));

  // At any fixed candidate the acquisition mean - beta * sd may never
  // increase with beta.
  int monotone_bad = 0;
  for (int i = 0; i < grid.rows; ++i) {
    double prev = std::numeric_limits<double>::infinity();
    for (int bi = 0; bi < 100; ++bi) {
      const double beta = 10.0 * bi / 99.0;
      const double acq = mean[i] - beta * sd[i];
      if (acq > prev + 1e-15) ++monotone_bad;
      prev = acq;
    }
  }

  detail = fmt("beta=0 proposal off mean-argmin by %.2e, %d monotonicity "
               "violations over %d candidates x 100 betas",
               prop_err, monotone_bad, grid.rows);
  return prop_err < 1e-12 && monotone_bad == 0;
}

// ---------------------------------------------------------------- criterion 5

bool airl_identity(std::string& detail) {
  imit::DiscConfig cfg;
  cfg.feature_dim = 12;
  cfg.hidden = 32;
  cfg.hidden_layers = 2;
  imit::GailDiscriminator disc(cfg, 42);
  Rng rng(606);
  double worst = 0.0, biggest_logit = 0.0;
  for (int i = 0; i < 1000; ++i) {
    std::vector<double> feat(12);
    for (double& f : feat) f = rng.uniform(-3.0, 3.0);
    const double z = disc.logit(feat);
    worst = std::max(worst, std::fabs(disc.reward(feat) - z));
    biggest_logit = std::max(biggest_logit, std::fabs(z));
  }
  detail = fmt("1000 inputs, worst |reward - logit| %.2e (max |logit| %.2f)",
               worst, biggest_logit);
  return worst < 1e-9;
}

// ---------------------------------------------------------------- criterion 6

bool sac_sanity(std::string& detail) {
  // Deterministic two-state cycle s0 -> s1 -> s0 with rewards 1 and 0 under
  // a pinned policy; the tabular oracle solves (I - gamma P) q = r directly.
  rl::SacConfig cfg;
  cfg.obs_dim = 1;
  cfg.action_dim = 1;
  cfg.hidden = 8;
  cfg.hidden_layers = 0;
  cfg.gamma = 0.9;
  cfg.tau = 1.0;
  cfg.lr = 5e-3;
  cfg.fixed_alpha = 0.0;
  rl::SacAgent agent(cfg, 21);
  const double ath = std::atanh(0.5);
  agent.policy().weight(0).value.at(0, 0) = std::atanh(-0.5) - ath;
  agent.policy().bias(0).value.at(0, 0) = ath;
  agent.policy().weight(0).value.at(1, 0) = 0.0;
  agent.policy().bias(0).value.at(0, 1) = -30.0;

  rl::ReplayBuffer buf(4);
  rl::TransitionRecord rec;
  rec.s = {0.0};
  rec.a = {0.5};
  rec.reward = 1.0;
  rec.s_next = {1.0};
  buf.add(rec);
  rec.s = {1.0};
  rec.a = {-0.5};
  rec.reward = 0.0;
  rec.s_next = {0.0};
  buf.add(rec);
  rl::Batch batch = rl::assemble_batch(buf, {0, 1});
  for (int i = 0; i < 6000; ++i) {
    agent.q_update(batch);
    agent.soft_update();
  }

  Tensor p(2, 2);
  p.at(0, 0) = 1.0;
  p.at(0, 1) = -0.9;
  p.at(1, 0) = -0.9;
  p.at(1, 1) = 1.0;
  const std::vector<double> q_oracle = linalg::solve(p, {1.0, 0.0});
  Tensor qin = Tensor::zeros(2, 2);
  qin.at(0, 1) = 0.5;
  qin.at(1, 0) = 1.0;
  qin.at(1, 1) = -0.5;
  double q_err = 0.0;
  for (auto* q : {&agent.q1(), &agent.q2()}) {
    const Tensor v = q->forward(qin);
    q_err = std::max(q_err, std::fabs(v.at(0, 0) - q_oracle[0]));
    q_err = std::max(q_err, std::fabs(v.at(1, 0) - q_oracle[1]));
  }

  // One-step bandit: reward -(a - 0.35)^2, greedy action found by grid
  // search, the trained policy mean must land within 0.05 of it.
  auto bandit_reward = [](double a) { return -(a - 0.35) * (a - 0.35); };
  double grid_best = -1.0, grid_val = bandit_reward(-1.0);
  for (int i = 0; i <= 2000; ++i) {
    const double a = -1.0 + 2.0 * i / 2000.0;
    if (bandit_reward(a) > grid_val) {
      grid_val = bandit_reward(a);
      grid_best = a;
    }
  }

  rl::SacConfig bc;
  bc.obs_dim = 1;
  bc.action_dim = 1;
  bc.hidden = 32;
  bc.hidden_layers = 1;
  bc.lr = 3e-3;
  bc.tau = 0.05;
  bc.fixed_alpha = 0.02;
  rl::SacAgent bandit(bc, 5);
  rl::ReplayBuffer bbuf(4096);
  Rng rng(99);
  for (int i = 0; i < 2048; ++i) {
    rl::TransitionRecord t;
    const double a = rng.uniform(-1.0, 1.0);
    t.s = {0.0};
    t.a = {a};
    t.reward = bandit_reward(a);
    t.s_next = {0.0};
    t.done = true;
    bbuf.add(t);
  }
  Rng sampler(123);
  for (int round = 0; round < 800; ++round) {
    rl::Batch b = rl::assemble_batch(bbuf, bbuf.sample_indices(128, sampler));
    bandit.q_update(b);
    bandit.policy_update(b);
    bandit.soft_update();
  }
  const double mean_act = bandit.act({0.0}, {}, true)[0];
  const double bandit_err = std::fabs(mean_act - grid_best);

  detail = fmt("q-eval err %.4f (tol 1e-2), bandit mean %.3f vs grid argmax "
               "%.3f (tol 0.05)",
               q_err, mean_act, grid_best);
  return q_err < 1e-2 && bandit_err < 0.05;
}

// ------------------------------------------------- shared pendulum demo pack

const std::vector<features::FeatureTrajectory>& pendulum_demos() {
  static std::vector<features::FeatureTrajectory> demos = [] {
    const sim::EnvSpec spec = sim::builtin_spec("pendulum");
    DemoGenConfig cfg;
    cfg.budget_steps = 30000;
    cfg.episodes = 10;
    cfg.sac.batch_size = 128;
    cfg.sac.hidden = 64;
    cfg.sac.hidden_layers = 2;
    return generate_demos(spec, cfg, 1);
  }();
  return demos;
}

cfg::ExperimentConfig pendulum_run_config(std::uint64_t seed,
                                          const std::string& out) {
  cfg::ExperimentConfig cfg;
  cfg.run.env = "pendulum";
  cfg.run.algo = "sail";
  cfg.run.strategy = "fixed";
  cfg.run.seed = seed;
  cfg.run.max_steps = 30000;
  cfg.run.subsample = 200;
  cfg.run.output_dir = (kTmp / out).string();
  cfg.sac.batch_size = 128;
  cfg.sac.hidden = 64;
  cfg.sac.hidden_layers = 2;
  cfg.imitation.hidden = 64;
  cfg.imitation.hidden_layers = 2;
  cfg.imitation.pretrain_steps = 5000;
  return cfg;
}

// Uniform-random policy run through the same distance pipeline as evaluate().
double random_policy_distance(const sim::EnvSpec& spec,
                              const std::vector<features::FeatureTrajectory>& demos,
                              int episodes, std::uint64_t seed, int cap) {
  const sim::Environment env = sim::make_env(spec, spec.default_morphology);
  const auto demo_ref =
      transport::subsample(demos, cap, derive_seed(seed, "eval-demo-ref"));
  double sum = 0.0;
  for (int e = 0; e < episodes; ++e) {
    sim::SimState state = env.reset(derive_seed(seed, "eval-reset", e));
    Rng act_rng(derive_seed(seed, "rand-act", e));
    std::vector<sim::SimState> states = {state};
    for (int t = 0; t < spec.episode_length; ++t) {
      std::vector<double> action(env.action_dim());
      for (double& a : action) a = act_rng.uniform(-1.0, 1.0);
      const sim::StepResult sr = env.step(state, action);
      if (sr.state.failed) break;
      states.push_back(sr.state);
      state = sr.state;
      if (sr.terminated) break;
    }
    const auto traj =
        features::phi_trajectory(states, env, demos.front().schema);
    const auto ep =
        transport::subsample({traj}, cap, derive_seed(seed, "eval-subsample", e));
    sum += transport::wasserstein_exact(ep, demo_ref).first;
  }
  return sum / episodes;
}

// ---------------------------------------------------------------- criterion 7

bool imitation_works(std::string& detail) {
  const sim::EnvSpec spec = sim::builtin_spec("pendulum");
  const auto& demos = pendulum_demos();
  std::string parts;
  bool ok = true;
  for (std::uint64_t seed : {1, 2, 3}) {
    cfg::ExperimentConfig cfg =
        pendulum_run_config(seed, fmt("c7_seed%llu", (unsigned long long)seed));
    const RunResult rr = run(cfg, demos);

    const sim::Environment env = sim::make_env(spec, spec.default_morphology);
    rl::SacAgent agent(sac_config_for(cfg, env), seed);
    agent.restore(nn::Checkpoint::load_file(rr.checkpoint_path));
    const EvalReport ev = evaluate(agent, spec, spec.default_morphology, demos,
                                   10, 900 + seed, 200);
    const double rand_w =
        random_policy_distance(spec, demos, 10, 900 + seed, 200);
    const double ratio = ev.mean / rand_w;
    parts += fmt("%sseed %llu: %.4f vs random %.4f (x%.2f)",
                 parts.empty() ? "" : "; ", (unsigned long long)seed, ev.mean,
                 rand_w, ratio);
    ok = ok && ev.mean <= 0.5 * rand_w;
  }
  detail = parts + "; need <=0.50x";
  return ok;
}

// ---------------------------------------------------------------- criterion 9

bool strategy_ordering(std::string& detail) {
  sim::MorphologyBounds bounds;
  bounds.lower.assign(4, 0.02);
  bounds.upper.assign(4, 0.6);
  const std::vector<double> target = {0.47, 0.11, 0.30, 0.52};
  const std::vector<double> weight = {1.0, 1.3, 0.8, 1.1};
  auto truth = [&](const sim::MorphologyVector& xi) {
    double s = 0.0;
    for (int d = 0; d < 4; ++d)
      s += weight[d] * (xi.lengths[d] - target[d]) * (xi.lengths[d] - target[d]);
    return s;
  };

  morph::BoConfig bo;
  morph::QPsoStrategy::Config qcfg;
  auto best_found = [&](const std::string& name, std::uint64_t seed) {
    auto strat = morph::make_strategy(name, {}, bo, qcfg,
                                      derive_seed(seed, "accept-" + name));
    morph::MorphDataset ds;
    Rng noise(derive_seed(seed, "accept-noise-" + name));
    for (int k = 0; k < 30; ++k) {
      const sim::MorphologyVector xi = strat->propose(ds, bounds);
      bounds.validate(xi);
      ds.add_completed(xi, {truth(xi) + noise.normal(0.0, 0.05)});
    }
    // The point the strategy would report: lowest noisy observation.
    const auto inc = morph::incumbent_best(ds, bounds);
    return truth(inc->first);
  };

  int bo_wins = 0;
  double bo_mean = 0.0, rs_mean = 0.0, cma_mean = 0.0;
  std::string parts;
  for (std::uint64_t seed : {1, 2, 3}) {
    const double b = best_found("bo", seed);
    const double r = best_found("random", seed);
    const double c = best_found("cmaes", seed);
    if (b <= r) ++bo_wins;
    bo_mean += b / 3.0;
    rs_mean += r / 3.0;
    cma_mean += c / 3.0;
    parts += fmt("%s[bo %.4f rs %.4f cma %.4f]", parts.empty() ? "" : " ", b,
                 r, c);
  }
  detail = fmt("%s; bo<=rs on %d/3 seeds, means bo %.4f rs %.4f cma %.4f",
               parts.c_str(), bo_wins, bo_mean, rs_mean, cma_mean);
  return bo_wins >= 2 && bo_mean < cma_mean && rs_mean < cma_mean;
}

// --------------------------------------------------------------- criterion 10

bool determinism(std::string& detail) {
  const auto& demos = pendulum_demos();
  std::vector<std::string> logs;
  for (const char* out : {"c10_a", "c10_b"}) {
    cfg::ExperimentConfig cfg = pendulum_run_config(7, out);
    cfg.run.algo = "gail";
    cfg.run.max_steps = 3000;
    cfg.run.subsample = 100;
    logs.push_back(run(cfg, demos).metric_path);
  }
  auto slurp = [](const std::string& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  const std::string a = slurp(logs[0]);
  const std::string b = slurp(logs[1]);
  detail = fmt("two 3000-step runs, logs %zu bytes, byte-identical: %s",
               a.size(), a == b && !a.empty() ? "yes" : "NO");
  return !a.empty() && a == b;
}

// --------------------------------------------------------------- criterion 11

bool demos_baseline(std::string& detail) {
  const auto& demos = pendulum_demos();
  const double mpd = transport::mean_pairwise_demo_distance(demos);

  const fs::path demo_file = kTmp / "c11_demos.txt";
  io::save_demos(demos, demo_file.string());

  // A small real metric log for the plot exporter to aggregate.
  const fs::path log = kTmp / "c11_metrics.csv";
  {
    metrics::MetricLogger logger(log.string(), "fixed", 1, 1);
    logger.log(200, 0, 0.9, -1.0, {0.6});
    logger.log(400, 1, 0.7, -0.8, {0.6});
    logger.log(600, 2, 0.5, -0.6, {0.6});
  }

  const fs::path series = kTmp / "c11_series.csv";
  const std::string cmd = std::string(COIMIT_BIN) + " export-plots " +
                          log.string() + " --demos " + demo_file.string() +
                          " --out " + series.string() + " > " +
                          (kTmp / "c11_stdout.txt").string();
  const int rc = std::system(cmd.c_str());

  double demo_series_value = -1.0;
  std::ifstream in(series);
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("Demonstrations,", 0) == 0) {
      std::stringstream ss(line);
      std::string field;
      std::getline(ss, field, ',');  // label
      std::getline(ss, field, ',');  // step
      std::getline(ss, field, ',');  // mean
      demo_series_value = std::strtod(field.c_str(), nullptr);
    }
  }
  detail = fmt("mean pairwise demo distance %.6f, exporter rc %d, "
               "\"Demonstrations\" series value %.6f",
               mpd, rc, demo_series_value);
  return mpd > 0.0 && rc == 0 && std::fabs(demo_series_value - mpd) < 1e-12;
}

}  // namespace

int main() {
  fs::remove_all(kTmp);
  fs::create_directories(kTmp);

  criterion(1, "transport-oracle", transport_oracle);
  criterion(2, "autodiff-gradients", autodiff_gradients);
  criterion(3, "gp-correctness", gp_correctness);
  criterion(4, "lcb-contract", lcb_contract);
  criterion(5, "airl-identity", airl_identity);
  criterion(6, "sac-sanity", sac_sanity);
  criterion(7, "imitation-works", imitation_works);
  std::printf("[    ]  8 morphology-recovery   covered by the acceptance_long "
              "binary\n");
  criterion(9, "strategy-ordering", strategy_ordering);
  criterion(10, "determinism", determinism);
  criterion(11, "demos-baseline", demos_baseline);

  std::printf("acceptance: %d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
