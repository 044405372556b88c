#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "coil/errors.hpp"
#include "coil/replay.hpp"
#include "coil/rng.hpp"
#include "coil/sac.hpp"

using namespace coil;
using namespace coil::rl;

namespace {

TransitionRecord make_rec(double s, double a, double r, double s_next,
                          bool done) {
  TransitionRecord t;
  t.s = {s};
  t.a = {a};
  t.s_next = {s_next};
  t.reward = r;
  t.done = done;
  return t;
}

SacConfig small_config() {
  SacConfig cfg;
  cfg.obs_dim = 1;
  cfg.action_dim = 1;
  cfg.xi_dim = 0;
  cfg.hidden = 16;
  cfg.hidden_layers = 1;
  cfg.batch_size = 8;
  return cfg;
}

}  // namespace

TEST_CASE("replay ring evicts oldest once full") {
  ReplayBuffer buf(4);
  for (int i = 0; i < 6; ++i) buf.add(make_rec(i, 0, 0, 0, false));
  CHECK(buf.size() == 4);
  // Slots 0 and 1 were overwritten by records 4 and 5.
  CHECK(buf.at(0).s[0] == doctest::Approx(4.0));
  CHECK(buf.at(1).s[0] == doctest::Approx(5.0));
  CHECK(buf.at(2).s[0] == doctest::Approx(2.0));
  CHECK(buf.at(3).s[0] == doctest::Approx(3.0));
}

TEST_CASE("replay rejects zero capacity and empty sampling") {
  CHECK_THROWS_AS(ReplayBuffer(0), BoundsViolation);
  ReplayBuffer buf(8);
  Rng rng(1);
  CHECK_THROWS_AS(buf.sample_indices(4, rng), EmptyBatch);
}

TEST_CASE("assemble_batch lays out observation, morphology and masks") {
  ReplayBuffer buf(8);
  TransitionRecord t;
  t.s = {1.0, 2.0};
  t.a = {0.25};
  t.s_next = {3.0, 4.0};
  t.xi_norm = {0.5, 0.75, 0.1};
  t.reward = -1.5;
  t.done = true;
  buf.add(t);
  t.done = false;
  t.reward = 2.0;
  buf.add(t);

  Batch b = assemble_batch(buf, {0, 1});
  CHECK(b.n == 2);
  CHECK(b.s.cols == 5);
  CHECK(b.s.at(0, 0) == doctest::Approx(1.0));
  CHECK(b.s.at(0, 2) == doctest::Approx(0.5));
  CHECK(b.s.at(0, 4) == doctest::Approx(0.1));
  CHECK(b.s_next.at(1, 1) == doctest::Approx(4.0));
  CHECK(b.s_next.at(1, 3) == doctest::Approx(0.75));
  CHECK(b.not_done.at(0, 0) == doctest::Approx(0.0));
  CHECK(b.not_done.at(1, 0) == doctest::Approx(1.0));
  CHECK(b.r.at(0, 0) == doctest::Approx(-1.5));

  CHECK_THROWS_AS(assemble_batch(buf, {}), EmptyBatch);
  buf.add(make_rec(0, 0, 0, 0, false));  // scalar obs, no xi
  CHECK_THROWS_AS(assemble_batch(buf, {0, 2}), DimensionError);
}

TEST_CASE("deterministic action is repeatable, stochastic ones vary") {
  SacAgent agent(small_config(), 7);
  const std::vector<double> obs{0.3};
  auto a1 = agent.act(obs, {}, true);
  auto a2 = agent.act(obs, {}, true);
  CHECK(a1.size() == 1);
  CHECK(a1[0] == a2[0]);
  CHECK(std::abs(a1[0]) <= 1.0);

  auto s1 = agent.act(obs, {}, false);
  auto s2 = agent.act(obs, {}, false);
  CHECK(s1[0] != s2[0]);
  CHECK(std::abs(s1[0]) <= 1.0);

  CHECK_THROWS_AS(agent.act({0.1, 0.2}, {}, true), DimensionError);
  CHECK_THROWS_AS(agent.act(obs, {0.5}, true), DimensionError);
}

TEST_CASE("alpha follows the configured mode") {
  SacConfig cfg = small_config();
  cfg.init_alpha = 0.37;
  SacAgent agent(cfg, 1);
  CHECK(agent.alpha() == doctest::Approx(0.37));

  cfg.fixed_alpha = 0.05;
  SacAgent pinned(cfg, 1);
  CHECK(pinned.alpha() == doctest::Approx(0.05));
}

TEST_CASE("targets start equal to online nets and track them under tau") {
  SacConfig cfg = small_config();
  cfg.tau = 1.0;
  SacAgent agent(cfg, 3);
  auto po = agent.q1().params();
  auto pt = agent.q1_target().params();
  for (size_t i = 0; i < po.size(); ++i)
    for (size_t k = 0; k < po[i]->value.v.size(); ++k)
      CHECK(po[i]->value.v[k] == pt[i]->value.v[k]);

  po[0]->value.v[0] += 1.0;
  agent.soft_update();
  CHECK(agent.q1_target().params()[0]->value.v[0] ==
        doctest::Approx(po[0]->value.v[0]));

  SacConfig slow = small_config();
  slow.tau = 0.25;
  SacAgent lag(slow, 3);
  const double before = lag.q1_target().params()[0]->value.v[0];
  lag.q1().params()[0]->value.v[0] = before + 4.0;
  lag.soft_update();
  CHECK(lag.q1_target().params()[0]->value.v[0] ==
        doctest::Approx(before + 1.0));
}

TEST_CASE("q regression hits the immediate reward when gamma is zero") {
  SacConfig cfg = small_config();
  cfg.gamma = 0.0;
  cfg.lr = 3e-3;
  SacAgent agent(cfg, 11);

  ReplayBuffer buf(4);
  buf.add(make_rec(0.2, 0.4, 1.25, 0.6, false));
  buf.add(make_rec(-0.5, -0.1, -0.75, 0.1, false));
  Batch b = assemble_batch(buf, {0, 1});

  for (int i = 0; i < 3000; ++i) agent.q_update(b);

  Tensor qin = Tensor::zeros(2, 2);
  qin.at(0, 0) = 0.2;
  qin.at(0, 1) = 0.4;
  qin.at(1, 0) = -0.5;
  qin.at(1, 1) = -0.1;
  const Tensor q = agent.q1().forward(qin);
  CHECK(q.at(0, 0) == doctest::Approx(1.25).epsilon(0.01));
  CHECK(q.at(1, 0) == doctest::Approx(-0.75).epsilon(0.02));
}

TEST_CASE("two-state policy evaluation matches the Bellman fixpoint") {
  // Deterministic cycle: s0 --a=+0.5--> s1 --a=-0.5--> s0, rewards 1 and 0,
  // gamma 0.9. The policy is a single linear layer pinned so its squashed
  // mean is exactly +-0.5 with a vanishing stddev, and alpha is held at zero,
  // so the fitted Q must solve Q0 = 1 + 0.9 Q1, Q1 = 0.9 Q0.
  SacConfig cfg;
  cfg.obs_dim = 1;
  cfg.action_dim = 1;
  cfg.hidden = 8;
  cfg.hidden_layers = 0;
  cfg.gamma = 0.9;
  cfg.tau = 1.0;
  cfg.lr = 5e-3;
  cfg.fixed_alpha = 0.0;
  SacAgent agent(cfg, 21);

  const double ath = std::atanh(0.5);
  auto& w = agent.policy().weight(0);
  auto& bias = agent.policy().bias(0);
  w.value.at(0, 0) = std::atanh(-0.5) - ath;  // mean head
  bias.value.at(0, 0) = ath;
  w.value.at(1, 0) = 0.0;  // log-std head, clamps to log_std_min
  bias.value.at(0, 1) = -30.0;

  ReplayBuffer buf(4);
  buf.add(make_rec(0.0, 0.5, 1.0, 1.0, false));
  buf.add(make_rec(1.0, -0.5, 0.0, 0.0, false));
  Batch b = assemble_batch(buf, {0, 1});

  for (int i = 0; i < 6000; ++i) {
    agent.q_update(b);
    agent.soft_update();
  }

  const double q0_expected = 1.0 / (1.0 - 0.81);
  const double q1_expected = 0.9 * q0_expected;
  Tensor qin = Tensor::zeros(2, 2);
  qin.at(0, 0) = 0.0;
  qin.at(0, 1) = 0.5;
  qin.at(1, 0) = 1.0;
  qin.at(1, 1) = -0.5;
  for (auto* q : {&agent.q1(), &agent.q2()}) {
    const Tensor v = q->forward(qin);
    CHECK(std::abs(v.at(0, 0) - q0_expected) < 1e-2);
    CHECK(std::abs(v.at(1, 0) - q1_expected) < 1e-2);
  }
}

TEST_CASE("policy improvement solves a continuous bandit") {
  // One step, done everywhere, reward -(a - 0.3)^2: the greedy action is 0.3.
  SacConfig cfg;
  cfg.obs_dim = 1;
  cfg.action_dim = 1;
  cfg.hidden = 32;
  cfg.hidden_layers = 1;
  cfg.lr = 3e-3;
  cfg.tau = 0.05;
  cfg.fixed_alpha = 0.02;
  SacAgent agent(cfg, 5);

  ReplayBuffer buf(4096);
  Rng rng(99);
  for (int i = 0; i < 2048; ++i) {
    const double a = rng.uniform(-1.0, 1.0);
    buf.add(make_rec(0.0, a, -(a - 0.3) * (a - 0.3), 0.0, true));
  }

  Rng sampler(123);
  for (int round = 0; round < 800; ++round) {
    Batch b = assemble_batch(buf, buf.sample_indices(128, sampler));
    agent.q_update(b);
    agent.policy_update(b);
    agent.soft_update();
  }

  const auto a = agent.act({0.0}, {}, true);
  CHECK(std::abs(a[0] - 0.3) < 0.05);
}

TEST_CASE("prior term at the current policy mean changes nothing") {
  SacConfig cfg = small_config();
  cfg.fixed_alpha = 0.1;
  SacAgent with_prior(cfg, 31);
  SacAgent without(cfg, 31);

  ReplayBuffer buf(16);
  Rng rng(7);
  for (int i = 0; i < 8; ++i)
    buf.add(make_rec(rng.uniform(-1, 1), rng.uniform(-1, 1),
                     rng.uniform(-1, 1), rng.uniform(-1, 1), false));
  Batch b = assemble_batch(buf, {0, 1, 2, 3, 4, 5, 6, 7});

  // Prior mean = current squashed policy mean, so the squared-discrepancy
  // term is identically zero and contributes zero gradient even at weight 50.
  const Tensor out = with_prior.policy().forward(b.s);
  PriorBatch prior;
  prior.mean = Tensor::zeros(b.n, 1);
  for (int i = 0; i < b.n; ++i)
    prior.mean.at(i, 0) = std::tanh(out.at(i, 0));
  prior.sigma = 0.5;
  prior.weight = 50.0;

  with_prior.policy_update(b, &prior);
  without.policy_update(b, nullptr);

  auto pa = with_prior.policy().params();
  auto pb = without.policy().params();
  for (size_t i = 0; i < pa.size(); ++i)
    for (size_t k = 0; k < pa[i]->value.v.size(); ++k)
      CHECK(pa[i]->value.v[k] == pb[i]->value.v[k]);

  // An offset prior mean must actually move the policy.
  SacAgent pulled(cfg, 31);
  PriorBatch off = prior;
  for (int i = 0; i < b.n; ++i) off.mean.at(i, 0) += 0.2;
  pulled.policy_update(b, &off);
  bool any_diff = false;
  auto pc = pulled.policy().params();
  for (size_t i = 0; i < pc.size(); ++i)
    for (size_t k = 0; k < pc[i]->value.v.size(); ++k)
      if (pc[i]->value.v[k] != pb[i]->value.v[k]) any_diff = true;
  CHECK(any_diff);
}

TEST_CASE("entropy coefficient adapts toward the entropy target") {
  // A near-deterministic policy has log-probs far above the target entropy,
  // which must push alpha up. With a unit pre-squash stddev the squashed
  // distribution is close to uniform on [-1, 1], entropy above the -1
  // target, so alpha has to fall. (A very wide pre-squash Gaussian would
  // not work for the second leg: tanh piles its mass at the action bounds
  // and the action-space entropy collapses again.)
  auto run = [](double log_std_bias) {
    SacConfig cfg;
    cfg.obs_dim = 1;
    cfg.action_dim = 1;
    cfg.hidden = 8;
    cfg.hidden_layers = 0;
    cfg.lr = 1e-2;
    SacAgent agent(cfg, 13);
    agent.policy().bias(0).value.at(0, 1) = log_std_bias;

    ReplayBuffer buf(8);
    buf.add(make_rec(0.1, 0.2, 0.0, 0.3, false));
    Batch b = assemble_batch(buf, {0, 0, 0, 0});
    const double before = agent.alpha();
    for (int i = 0; i < 5; ++i) agent.policy_update(b);
    return agent.alpha() - before;
  };
  CHECK(run(-30.0) > 0.0);
  CHECK(run(0.0) < 0.0);
}

TEST_CASE("checkpoint round trip restores nets, alpha and optimizer state") {
  SacConfig cfg = small_config();
  cfg.gamma = 0.0;  // q targets become sampling-free
  SacAgent a(cfg, 41);

  ReplayBuffer buf(16);
  Rng rng(17);
  for (int i = 0; i < 8; ++i)
    buf.add(make_rec(rng.uniform(-1, 1), rng.uniform(-1, 1),
                     rng.uniform(-1, 1), rng.uniform(-1, 1), false));
  Batch b = assemble_batch(buf, {0, 1, 2, 3, 4, 5, 6, 7});
  for (int i = 0; i < 5; ++i) {
    a.q_update(b);
    a.policy_update(b);
    a.soft_update();
  }

  const nn::Checkpoint ck = a.checkpoint();
  SacAgent c(cfg, 999);
  c.restore(ck);

  CHECK(c.alpha() == a.alpha());
  auto pa = a.policy().params();
  auto pc = c.policy().params();
  for (size_t i = 0; i < pa.size(); ++i)
    for (size_t k = 0; k < pa[i]->value.v.size(); ++k)
      CHECK(pa[i]->value.v[k] == pc[i]->value.v[k]);

  // With gamma 0 a q_update is deterministic given parameters and batch, so
  // matching results here mean the Adam moments and step count survived too.
  const double la = a.q_update(b);
  const double lc = c.q_update(b);
  CHECK(la == lc);
  auto qa = a.q1().params();
  auto qc = c.q1().params();
  for (size_t i = 0; i < qa.size(); ++i)
    for (size_t k = 0; k < qa[i]->value.v.size(); ++k)
      CHECK(qa[i]->value.v[k] == qc[i]->value.v[k]);

  nn::Checkpoint bad = ck;
  bad.tensors.erase("log_alpha");
  SacAgent d(cfg, 1000);
  CHECK_THROWS_AS(d.restore(bad), IoError);
}

TEST_CASE("invalid configurations are rejected") {
  SacConfig cfg = small_config();
  cfg.log_std_min = 3.0;
  CHECK_THROWS_AS(SacAgent(cfg, 1), ConfigError);
}
