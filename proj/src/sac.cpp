#include "coil/sac.hpp"

#include <cmath>
#include <utility>

#include "coil/errors.hpp"

namespace coil::rl {
namespace {

constexpr double kHalfLog2Pi = 0.9189385332046727;  // 0.5 * log(2*pi)
constexpr double kLog2 = 0.6931471805599453;

std::vector<int> layer_sizes(int in, int hidden, int layers, int out) {
  std::vector<int> sizes{in};
  for (int i = 0; i < layers; ++i) sizes.push_back(hidden);
  sizes.push_back(out);
  return sizes;
}

// log N(u; mean, sigma) minus the tanh change-of-variables term, summed over
// action dimensions. With u = mean + sigma * eps the Gaussian part reduces to
// -eps^2/2 - log(sigma) - log(2*pi)/2, and log(1 - tanh(u)^2) is evaluated in
// the numerically safe form 2*(log 2 - u - softplus(-2u)).
double softplus_stable(double x) {
  return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

double squashed_log_prob(const double* eps, const double* u,
                         const double* log_std, int dim) {
  double lp = 0.0;
  for (int d = 0; d < dim; ++d) {
    lp += -0.5 * eps[d] * eps[d] - log_std[d] - kHalfLog2Pi;
    lp -= 2.0 * (kLog2 - u[d] - softplus_stable(-2.0 * u[d]));
  }
  return lp;
}

}  // namespace

Batch assemble_batch(const ReplayBuffer& buffer,
                     const std::vector<std::size_t>& indices) {
  if (indices.empty()) throw EmptyBatch("assemble_batch: no indices");
  const TransitionRecord& first = buffer.at(indices[0]);
  const int obs = static_cast<int>(first.s.size());
  const int xi = static_cast<int>(first.xi_norm.size());
  const int act = static_cast<int>(first.a.size());
  const int n = static_cast<int>(indices.size());

  Batch b;
  b.n = n;
  b.s = Tensor::zeros(n, obs + xi);
  b.a = Tensor::zeros(n, act);
  b.r = Tensor::zeros(n, 1);
  b.s_next = Tensor::zeros(n, obs + xi);
  b.not_done = Tensor::zeros(n, 1);

  for (int i = 0; i < n; ++i) {
    const TransitionRecord& t = buffer.at(indices[i]);
    if (static_cast<int>(t.s.size()) != obs ||
        static_cast<int>(t.s_next.size()) != obs ||
        static_cast<int>(t.xi_norm.size()) != xi ||
        static_cast<int>(t.a.size()) != act)
      throw DimensionError("assemble_batch: mixed transition shapes");
    for (int j = 0; j < obs; ++j) {
      b.s.at(i, j) = t.s[j];
      b.s_next.at(i, j) = t.s_next[j];
    }
    for (int j = 0; j < xi; ++j) {
      b.s.at(i, obs + j) = t.xi_norm[j];
      b.s_next.at(i, obs + j) = t.xi_norm[j];
    }
    for (int j = 0; j < act; ++j) b.a.at(i, j) = t.a[j];
    b.r.at(i, 0) = t.reward;
    b.not_done.at(i, 0) = t.done ? 0.0 : 1.0;
  }
  return b;
}

SacAgent::SacAgent(SacConfig cfg, std::uint64_t seed)
    : cfg_(cfg),
      policy_("pi",
              layer_sizes(cfg.obs_dim + cfg.xi_dim, cfg.hidden,
                          cfg.hidden_layers, 2 * cfg.action_dim),
              nn::Activation::ReLU, derive_seed(seed, "sac-pi")),
      q1_("q1",
          layer_sizes(cfg.obs_dim + cfg.xi_dim + cfg.action_dim, cfg.hidden,
                      cfg.hidden_layers, 1),
          nn::Activation::ReLU, derive_seed(seed, "sac-q1")),
      q2_("q2",
          layer_sizes(cfg.obs_dim + cfg.xi_dim + cfg.action_dim, cfg.hidden,
                      cfg.hidden_layers, 1),
          nn::Activation::ReLU, derive_seed(seed, "sac-q2")),
      q1_target_("q1t",
                 layer_sizes(cfg.obs_dim + cfg.xi_dim + cfg.action_dim,
                             cfg.hidden, cfg.hidden_layers, 1),
                 nn::Activation::ReLU, derive_seed(seed, "sac-q1")),
      q2_target_("q2t",
                 layer_sizes(cfg.obs_dim + cfg.xi_dim + cfg.action_dim,
                             cfg.hidden, cfg.hidden_layers, 1),
                 nn::Activation::ReLU, derive_seed(seed, "sac-q2")),
      log_alpha_("log_alpha",
                 Tensor::full(1, 1, std::log(std::max(cfg.init_alpha, 1e-12)))),
      opt_policy_(policy_.params(), {.lr = cfg.lr}),
      opt_q_([this] {
               auto ps = q1_.params();
               auto p2 = q2_.params();
               ps.insert(ps.end(), p2.begin(), p2.end());
               return ps;
             }(),
             {.lr = cfg.lr, .weight_decay = cfg.q_weight_decay}),
      opt_alpha_({&log_alpha_}, {.lr = cfg.lr}),
      act_rng_(derive_seed(seed, "sac-act")),
      update_rng_(derive_seed(seed, "sac-update")) {
  if (cfg.obs_dim <= 0 || cfg.action_dim <= 0 || cfg.xi_dim < 0)
    throw ConfigError("sac: obs_dim and action_dim must be positive");
  if (cfg.log_std_min >= cfg.log_std_max)
    throw ConfigError("sac: log_std_min must be below log_std_max");
}

SacAgent::Head SacAgent::policy_head(const Tensor& out) const {
  const int a = cfg_.action_dim;
  Head h{Tensor::zeros(out.rows, a), Tensor::zeros(out.rows, a)};
  for (int i = 0; i < out.rows; ++i)
    for (int j = 0; j < a; ++j) {
      h.mean.at(i, j) = out.at(i, j);
      double ls = out.at(i, a + j);
      if (ls < cfg_.log_std_min) ls = cfg_.log_std_min;
      if (ls > cfg_.log_std_max) ls = cfg_.log_std_max;
      h.log_std.at(i, j) = ls;
    }
  return h;
}

std::vector<double> SacAgent::act(const std::vector<double>& obs,
                                  const std::vector<double>& xi_norm,
                                  bool deterministic) {
  if (static_cast<int>(obs.size()) != cfg_.obs_dim)
    throw DimensionError("sac act: observation width mismatch");
  if (static_cast<int>(xi_norm.size()) != cfg_.xi_dim)
    throw DimensionError("sac act: morphology width mismatch");
  Tensor in = Tensor::zeros(1, cfg_.obs_dim + cfg_.xi_dim);
  for (std::size_t j = 0; j < obs.size(); ++j) in.at(0, j) = obs[j];
  for (std::size_t j = 0; j < xi_norm.size(); ++j)
    in.at(0, cfg_.obs_dim + j) = xi_norm[j];

  const Head h = policy_head(policy_.forward(in));
  std::vector<double> action(cfg_.action_dim);
  for (int d = 0; d < cfg_.action_dim; ++d) {
    double u = h.mean.at(0, d);
    if (!deterministic) u += std::exp(h.log_std.at(0, d)) * act_rng_.normal();
    action[d] = std::tanh(u);
  }
  return action;
}

double SacAgent::q_update(const Batch& batch) {
  const int n = batch.n;
  const int a = cfg_.action_dim;
  const double al = alpha();

  // Bootstrap targets are plain forward passes; nothing here needs gradients.
  const Head h = policy_head(policy_.forward(batch.s_next));
  Tensor next_in = Tensor::zeros(n, batch.s.cols + a);
  Tensor eps = Tensor::zeros(n, a);
  Tensor u = Tensor::zeros(n, a);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < batch.s.cols; ++j)
      next_in.at(i, j) = batch.s_next.at(i, j);
    for (int d = 0; d < a; ++d) {
      eps.at(i, d) = update_rng_.normal();
      u.at(i, d) = h.mean.at(i, d) +
                   std::exp(h.log_std.at(i, d)) * eps.at(i, d);
      next_in.at(i, batch.s.cols + d) = std::tanh(u.at(i, d));
    }
  }
  const Tensor q1t = q1_target_.forward(next_in);
  const Tensor q2t = q2_target_.forward(next_in);
  Tensor y = Tensor::zeros(n, 1);
  for (int i = 0; i < n; ++i) {
    const double lp = squashed_log_prob(
        eps.data() + static_cast<std::size_t>(i) * a,
        u.data() + static_cast<std::size_t>(i) * a,
        h.log_std.data() + static_cast<std::size_t>(i) * a, a);
    const double minq = std::min(q1t.at(i, 0), q2t.at(i, 0));
    y.at(i, 0) = batch.r.at(i, 0) +
                 cfg_.gamma * batch.not_done.at(i, 0) * (minq - al * lp);
  }

  ad::Tape tape;
  Tensor qin = Tensor::zeros(n, batch.s.cols + a);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < batch.s.cols; ++j) qin.at(i, j) = batch.s.at(i, j);
    for (int d = 0; d < a; ++d)
      qin.at(i, batch.s.cols + d) = batch.a.at(i, d);
  }
  const auto x = tape.constant(qin);
  const auto target = tape.constant(y);
  const auto l1 = tape.mean_all(tape.square(tape.sub(q1_.forward_tape(tape, x), target)));
  const auto l2 = tape.mean_all(tape.square(tape.sub(q2_.forward_tape(tape, x), target)));
  const auto loss = tape.add(l1, l2);
  q1_.zero_grad();
  q2_.zero_grad();
  tape.backward(loss);
  opt_q_.step();
  return 0.5 * tape.value(loss).at(0, 0);
}

double SacAgent::policy_update(const Batch& batch, const PriorBatch* prior) {
  const int n = batch.n;
  const int a = cfg_.action_dim;
  const double al = alpha();

  Tensor eps = Tensor::zeros(n, a);
  for (auto& e : eps.v) e = update_rng_.normal();
  Tensor gauss_base = Tensor::zeros(n, a);
  for (std::size_t k = 0; k < eps.v.size(); ++k)
    gauss_base.v[k] = -0.5 * eps.v[k] * eps.v[k] - kHalfLog2Pi;

  ad::Tape tape;
  const auto x = tape.constant(batch.s);
  const auto out = policy_.forward_tape(tape, x);
  const auto mean = tape.slice_cols(out, 0, a);
  const auto log_std =
      tape.clamp(tape.slice_cols(out, a, 2 * a), cfg_.log_std_min,
                 cfg_.log_std_max);
  const auto sigma = tape.exp(log_std);
  const auto u = tape.add(mean, tape.mul(sigma, tape.constant(eps)));
  const auto action = tape.tanh(u);

  // log pi(a|s): Gaussian density at u minus the tanh Jacobian, the latter as
  // 2*(log 2 - u - softplus(-2u)) per dimension.
  const auto gauss = tape.sub(tape.constant(gauss_base), log_std);
  const auto jac = tape.affine(
      tape.add(u, tape.softplus(tape.affine(u, -2.0, 0.0))), 2.0, -2.0 * kLog2);
  const auto log_prob = tape.sum_cols(tape.add(gauss, jac));

  const auto qin = tape.concat_cols(x, action);
  const auto q1n = q1_.forward_tape(tape, qin);
  const auto q2n = q2_.forward_tape(tape, qin);
  const auto minq = tape.sub(q1n, tape.relu(tape.sub(q1n, q2n)));
  auto loss = tape.mean_all(
      tape.add(tape.affine(log_prob, al, 0.0), tape.neg(minq)));

  if (prior && prior->weight > 0.0) {
    if (prior->mean.rows != n || prior->mean.cols != a)
      throw DimensionError("sac policy_update: prior mean shape mismatch");
    const auto diff = tape.sub(tape.tanh(mean), tape.constant(prior->mean));
    const auto penalty = tape.mean_all(tape.sum_cols(
        tape.square(tape.affine(diff, 1.0 / prior->sigma, 0.0))));
    loss = tape.add(loss, tape.affine(penalty, prior->weight, 0.0));
  }

  policy_.zero_grad();
  q1_.zero_grad();
  q2_.zero_grad();
  tape.backward(loss);
  // The Q networks sit on the policy's tape as a frozen critic; their
  // accumulated gradients are dropped rather than applied.
  q1_.zero_grad();
  q2_.zero_grad();
  opt_policy_.step();

  if (cfg_.fixed_alpha < 0.0) {
    double mean_lp = 0.0;
    for (int i = 0; i < n; ++i) mean_lp += tape.value(log_prob).at(i, 0);
    mean_lp /= n;
    const double target_entropy = -cfg_.target_entropy_scale * a;
    log_alpha_.grad.at(0, 0) = -(mean_lp + target_entropy);
    opt_alpha_.step();
  }
  return tape.value(loss).at(0, 0);
}

void SacAgent::soft_update() {
  const double tau = cfg_.tau;
  auto blend = [tau](nn::Mlp& online, nn::Mlp& target) {
    auto po = online.params();
    auto pt = target.params();
    for (std::size_t i = 0; i < po.size(); ++i)
      for (std::size_t k = 0; k < po[i]->value.v.size(); ++k)
        pt[i]->value.v[k] =
            tau * po[i]->value.v[k] + (1.0 - tau) * pt[i]->value.v[k];
  };
  blend(q1_, q1_target_);
  blend(q2_, q2_target_);
}

double SacAgent::alpha() const {
  if (cfg_.fixed_alpha >= 0.0) return cfg_.fixed_alpha;
  return std::exp(log_alpha_.value.at(0, 0));
}

nn::Checkpoint SacAgent::checkpoint() const {
  nn::Checkpoint ck;
  auto& self = const_cast<SacAgent&>(*this);
  for (nn::Mlp* net :
       {&self.policy_, &self.q1_, &self.q2_, &self.q1_target_,
        &self.q2_target_})
    ck.collect(net->params());
  ck.put("log_alpha", log_alpha_.value);
  opt_policy_.save_state(ck, "opt.pi");
  opt_q_.save_state(ck, "opt.q");
  opt_alpha_.save_state(ck, "opt.alpha");
  return ck;
}

void SacAgent::restore(const nn::Checkpoint& ck) {
  for (nn::Mlp* net : {&policy_, &q1_, &q2_, &q1_target_, &q2_target_})
    ck.restore(net->params());
  auto it = ck.tensors.find("log_alpha");
  if (it == ck.tensors.end())
    throw IoError("checkpoint missing tensor: log_alpha");
  log_alpha_.value = it->second;
  log_alpha_.zero_grad();
  opt_policy_.load_state(ck, "opt.pi");
  opt_q_.load_state(ck, "opt.q");
  opt_alpha_.load_state(ck, "opt.alpha");
}

}  // namespace coil::rl
