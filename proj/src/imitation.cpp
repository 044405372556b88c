#include "coil/imitation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "coil/errors.hpp"
#include "coil/kernels.hpp"

namespace coil::imit {
namespace {

constexpr double kLogitCap = 13.815509557963774;  // logit(1 - 1e-6)

std::vector<int> mlp_sizes(int in, int hidden, int layers, int out) {
  std::vector<int> sizes{in};
  for (int i = 0; i < layers; ++i) sizes.push_back(hidden);
  sizes.push_back(out);
  return sizes;
}

void check_batches(const Tensor& expert, const Tensor& policy, int dim) {
  if (expert.rows == 0 || policy.rows == 0)
    throw EmptyBatch("discriminator update needs nonempty batches");
  if (expert.cols != dim || policy.cols != dim)
    throw DimensionError("discriminator update: feature width mismatch");
}

Tensor single_row(const std::vector<double>& feat, int dim) {
  if (static_cast<int>(feat.size()) != dim)
    throw DimensionError("feature width mismatch");
  Tensor x(1, dim);
  std::copy(feat.begin(), feat.end(), x.v.begin());
  return x;
}

Tensor gather_rows(const Tensor& src, const std::vector<int>& idx) {
  Tensor out(static_cast<int>(idx.size()), src.cols);
  for (size_t i = 0; i < idx.size(); ++i)
    std::copy(src.data() + static_cast<size_t>(idx[i]) * src.cols,
              src.data() + static_cast<size_t>(idx[i] + 1) * src.cols,
              out.data() + i * src.cols);
  return out;
}

}  // namespace

GailDiscriminator::GailDiscriminator(DiscConfig cfg, std::uint64_t seed)
    : cfg_(cfg),
      net_("gail_disc",
           mlp_sizes(cfg.feature_dim, cfg.hidden, cfg.hidden_layers, 1),
           nn::Activation::ReLU, seed),
      opt_(net_.params(), {.lr = cfg.lr, .weight_decay = cfg.weight_decay}) {}

double GailDiscriminator::update(const Tensor& expert, const Tensor& policy) {
  check_batches(expert, policy, cfg_.feature_dim);
  ad::Tape tape;
  const auto ze = net_.forward_tape(tape, tape.constant(expert));
  const auto zp = net_.forward_tape(tape, tape.constant(policy));
  // -log sigmoid(z) = softplus(-z); -log(1 - sigmoid(z)) = softplus(z).
  const auto loss = tape.add(tape.mean_all(tape.softplus(tape.neg(ze))),
                             tape.mean_all(tape.softplus(zp)));
  net_.zero_grad();
  tape.backward(loss);
  opt_.step();
  return tape.value(loss).at(0, 0);
}

double GailDiscriminator::logit(const std::vector<double>& feat) const {
  return net_.forward(single_row(feat, cfg_.feature_dim)).at(0, 0);
}

double GailDiscriminator::reward(const std::vector<double>& feat) const {
  // The logit of the clamped classifier probability is the clamped logit.
  return std::clamp(logit(feat), -kLogitCap, kLogitCap);
}

SailCritic::SailCritic(CriticConfig cfg, std::uint64_t seed)
    : cfg_(cfg),
      net_("sail_critic",
           mlp_sizes(cfg.feature_dim, cfg.hidden, cfg.hidden_layers, 1),
           nn::Activation::ReLU, derive_seed(seed, "critic-init")),
      opt_(net_.params(), {.lr = cfg.lr, .weight_decay = cfg.weight_decay}),
      rng_(derive_seed(seed, "critic-mix")) {}

double SailCritic::update(const Tensor& expert, const Tensor& policy) {
  check_batches(expert, policy, cfg_.feature_dim);
  const int m = std::min(expert.rows, policy.rows);
  const int d = cfg_.feature_dim;

  Tensor mix(m, d);
  for (int i = 0; i < m; ++i) {
    const double* e =
        expert.data() + rng_.index(expert.rows) * static_cast<size_t>(d);
    const double* p =
        policy.data() + rng_.index(policy.rows) * static_cast<size_t>(d);
    const double t = rng_.uniform();
    for (int j = 0; j < d; ++j)
      mix.at(i, j) = t * e[j] + (1.0 - t) * p[j];
  }
  std::vector<Tensor> preacts;
  net_.forward_cached(mix, &preacts);

  ad::Tape tape;
  const auto score_e = net_.forward_tape(tape, tape.constant(expert));
  const auto score_p = net_.forward_tape(tape, tape.constant(policy));
  auto loss = tape.sub(tape.mean_all(score_p), tape.mean_all(score_e));

  // Input gradient of the critic at the interpolates, rebuilt on the tape
  // from the weight matrices with the ReLU activation pattern frozen: for a
  // piecewise-linear net this is the exact gradient almost everywhere, and
  // it keeps the penalty differentiable in the weights.
  const int layers = net_.layer_count();
  auto grad = tape.matmul(tape.constant(Tensor::full(m, 1, 1.0)),
                          tape.param(net_.weight(layers - 1)));
  for (int l = layers - 2; l >= 0; --l) {
    Tensor mask(preacts[l].rows, preacts[l].cols);
    for (size_t k = 0; k < mask.v.size(); ++k)
      mask.v[k] = preacts[l].v[k] > 0.0 ? 1.0 : 0.0;
    grad = tape.matmul(tape.mul(grad, tape.constant(mask)),
                       tape.param(net_.weight(l)));
  }
  const auto norm =
      tape.sqrt(tape.affine(tape.sum_cols(tape.square(grad)), 1.0, 1e-12));
  const auto penalty = tape.mean_all(tape.square(tape.affine(norm, 1.0, -1.0)));
  loss = tape.add(loss, tape.affine(penalty, cfg_.grad_penalty, 0.0));

  net_.zero_grad();
  tape.backward(loss);
  opt_.step();
  return tape.value(loss).at(0, 0);
}

double SailCritic::value(const std::vector<double>& feat) const {
  return net_.forward(single_row(feat, cfg_.feature_dim)).at(0, 0);
}

double SailCritic::reward(const std::vector<double>& feat) {
  const double v = value(feat);
  if (!cfg_.recenter_reward) return v;
  if (!center_init_) {
    reward_center_ = v;
    center_init_ = true;
  } else {
    reward_center_ = 0.99 * reward_center_ + 0.01 * v;
  }
  return v - reward_center_;
}

Tensor SailCritic::input_gradients(const Tensor& x) const {
  if (x.cols != cfg_.feature_dim)
    throw DimensionError("critic gradient: feature width mismatch");
  std::vector<Tensor> preacts;
  net_.forward_cached(x, &preacts);
  const int layers = net_.layer_count();

  const Tensor& w_last = net_.weight(layers - 1).value;
  Tensor g(x.rows, w_last.cols);
  for (int i = 0; i < x.rows; ++i)
    std::copy(w_last.v.begin(), w_last.v.end(),
              g.data() + static_cast<size_t>(i) * g.cols);
  for (int l = layers - 2; l >= 0; --l) {
    for (size_t k = 0; k < g.v.size(); ++k)
      if (preacts[l].v[k] <= 0.0) g.v[k] = 0.0;
    const Tensor& w = net_.weight(l).value;
    Tensor next(x.rows, w.cols);
    kernels::gemm_auto(false, false, x.rows, w.cols, w.rows, g.data(), g.cols,
                       w.data(), w.cols, next.data(), next.cols, false);
    g = std::move(next);
  }
  return g;
}

double SailCritic::gradient_penalty(const Tensor& x) const {
  const Tensor g = input_gradients(x);
  double acc = 0.0;
  for (int i = 0; i < g.rows; ++i) {
    double s = 0.0;
    for (int j = 0; j < g.cols; ++j) s += g.at(i, j) * g.at(i, j);
    const double n = std::sqrt(s);
    acc += (n - 1.0) * (n - 1.0);
  }
  return acc / g.rows;
}

InverseDynamics::InverseDynamics(InvDynConfig cfg, std::uint64_t seed)
    : cfg_(cfg),
      net_("inv_dyn",
           mlp_sizes(cfg.obs_dim + cfg.feature_dim, cfg.hidden,
                     cfg.hidden_layers, cfg.action_dim),
           nn::Activation::ReLU, seed),
      opt_(net_.params(), {.lr = cfg.lr}) {}

static Tensor concat_rows(const Tensor& a, const Tensor& b) {
  if (a.rows != b.rows) throw DimensionError("concat: row count mismatch");
  Tensor out(a.rows, a.cols + b.cols);
  for (int i = 0; i < a.rows; ++i) {
    std::copy(a.data() + static_cast<size_t>(i) * a.cols,
              a.data() + static_cast<size_t>(i + 1) * a.cols,
              out.data() + static_cast<size_t>(i) * out.cols);
    std::copy(b.data() + static_cast<size_t>(i) * b.cols,
              b.data() + static_cast<size_t>(i + 1) * b.cols,
              out.data() + static_cast<size_t>(i) * out.cols + a.cols);
  }
  return out;
}

double InverseDynamics::update(const Tensor& obs, const Tensor& target_feat,
                               const Tensor& actions) {
  if (obs.cols != cfg_.obs_dim || target_feat.cols != cfg_.feature_dim ||
      actions.cols != cfg_.action_dim)
    throw DimensionError("inverse dynamics update: width mismatch");
  if (obs.rows == 0) throw EmptyBatch("inverse dynamics update: empty batch");
  const Tensor in = concat_rows(obs, target_feat);
  ad::Tape tape;
  const auto pred = net_.forward_tape(tape, tape.constant(in));
  const auto loss =
      tape.mean_all(tape.square(tape.sub(pred, tape.constant(actions))));
  net_.zero_grad();
  tape.backward(loss);
  opt_.step();
  return tape.value(loss).at(0, 0);
}

Tensor InverseDynamics::predict(const Tensor& obs,
                                const Tensor& target_feat) const {
  if (obs.cols != cfg_.obs_dim || target_feat.cols != cfg_.feature_dim)
    throw DimensionError("inverse dynamics predict: width mismatch");
  return net_.forward(concat_rows(obs, target_feat));
}

DemoVae::DemoVae(VaeConfig cfg, std::uint64_t seed)
    : cfg_(cfg),
      enc_("vae_enc",
           mlp_sizes(cfg.feature_dim, cfg.hidden, cfg.hidden_layers,
                     2 * cfg.latent),
           nn::Activation::ReLU, derive_seed(seed, "vae-enc")),
      dec_("vae_dec",
           mlp_sizes(cfg.latent, cfg.hidden, cfg.hidden_layers,
                     cfg.feature_dim),
           nn::Activation::ReLU, derive_seed(seed, "vae-dec")),
      opt_([this] {
             auto ps = enc_.params();
             auto pd = dec_.params();
             ps.insert(ps.end(), pd.begin(), pd.end());
             return ps;
           }(),
           {.lr = cfg.lr}),
      rng_(derive_seed(seed, "vae-noise")) {}

double DemoVae::update(const Tensor& feats) {
  if (feats.rows == 0) throw EmptyBatch("vae update: empty batch");
  if (feats.cols != cfg_.feature_dim)
    throw DimensionError("vae update: feature width mismatch");
  const int k = cfg_.latent;
  Tensor eps(feats.rows, k);
  for (auto& e : eps.v) e = rng_.normal();

  ad::Tape tape;
  const auto x = tape.constant(feats);
  const auto h = enc_.forward_tape(tape, x);
  const auto mu = tape.slice_cols(h, 0, k);
  const auto logvar = tape.clamp(tape.slice_cols(h, k, 2 * k), -10.0, 10.0);
  const auto z = tape.add(
      mu, tape.mul(tape.exp(tape.affine(logvar, 0.5, 0.0)), tape.constant(eps)));
  const auto recon = dec_.forward_tape(tape, z);
  const auto recon_row = tape.sum_cols(tape.square(tape.sub(recon, x)));
  // KL(q || N(0, I)) per sample: 0.5 * sum(mu^2 + e^lv - 1 - lv).
  const auto kl_row = tape.sum_cols(tape.affine(
      tape.sub(tape.add(tape.square(mu), tape.exp(logvar)),
               tape.affine(logvar, 1.0, 1.0)),
      0.5, 0.0));
  const auto loss = tape.mean_all(
      tape.add(recon_row, tape.affine(kl_row, cfg_.beta, 0.0)));
  enc_.zero_grad();
  dec_.zero_grad();
  tape.backward(loss);
  opt_.step();
  return tape.value(loss).at(0, 0);
}

Tensor DemoVae::reconstruct(const Tensor& feats) const {
  if (feats.cols != cfg_.feature_dim)
    throw DimensionError("vae reconstruct: feature width mismatch");
  const Tensor h = enc_.forward(feats);
  Tensor mu(feats.rows, cfg_.latent);
  for (int i = 0; i < feats.rows; ++i)
    for (int j = 0; j < cfg_.latent; ++j) mu.at(i, j) = h.at(i, j);
  return dec_.forward(mu);
}

double DemoVae::reconstruction_error(const Tensor& feats) const {
  const Tensor r = reconstruct(feats);
  double acc = 0.0;
  for (size_t k = 0; k < r.v.size(); ++k) {
    const double d = r.v[k] - feats.v[k];
    acc += d * d;
  }
  return acc / feats.rows;
}

Tensor PolicyPrior::mean(const Tensor& obs, const Tensor& feat) const {
  if (!g_inv || !f || !g_inv->pretrained() || !f->pretrained())
    throw NotPretrained("policy prior needs pretrained models");
  if (sigma <= 0.0) throw ConfigError("policy prior scale must be positive");
  Tensor a = g_inv->predict(obs, f->reconstruct(feat));
  for (auto& x : a.v) x = std::clamp(x, -1.0, 1.0);
  return a;
}

Tensor stack_features(const std::vector<features::FeatureTrajectory>& demos) {
  int rows = 0;
  for (const auto& d : demos) rows += d.length();
  if (rows == 0) throw EmptyInput("no demonstration features");
  const int dim = demos.front().schema.dim();
  Tensor out(rows, dim);
  int r = 0;
  for (const auto& d : demos)
    for (const auto& f : d.rows) {
      if (static_cast<int>(f.size()) != dim)
        throw DimensionError("demonstration feature width mismatch");
      std::copy(f.begin(), f.end(), out.data() + static_cast<size_t>(r++) * dim);
    }
  return out;
}

namespace {

// Epoch-driver with a relative-improvement plateau rule shared by both
// pretraining fits.
template <typename EpochFn>
std::pair<int, double> fit_until_plateau(const PretrainConfig& cfg,
                                         EpochFn epoch) {
  double best = std::numeric_limits<double>::infinity();
  double last = best;
  int since = 0;
  int e = 0;
  for (; e < cfg.max_epochs; ++e) {
    last = epoch();
    if (best - last > cfg.plateau_tol * std::max(std::abs(best), 1e-12)) {
      best = last;
      since = 0;
    } else if (++since >= cfg.plateau_epochs) {
      ++e;
      break;
    }
  }
  return {e, last};
}

}  // namespace

PretrainStats pretrain(InverseDynamics& g_inv, DemoVae& vae,
                       const sim::Environment& env,
                       const features::FeatureSchema& schema,
                       const std::vector<features::FeatureTrajectory>& demos,
                       const PretrainConfig& cfg, std::uint64_t seed) {
  if (demos.empty()) throw EmptyInput("pretrain needs demonstrations");
  if (schema.dim() != g_inv.config().feature_dim)
    throw DimensionError("pretrain: schema width does not match g_inv");
  if (env.observation_dim() != g_inv.config().obs_dim ||
      env.action_dim() != g_inv.config().action_dim)
    throw DimensionError("pretrain: environment does not match g_inv");

  const int n = cfg.random_steps;
  const int act = env.action_dim();
  Tensor obs(n, env.observation_dim());
  Tensor feat_next(n, schema.dim());
  Tensor actions(n, act);

  Rng rollout(derive_seed(seed, "pretrain-rollout"));
  std::uint64_t episode = 0;
  sim::SimState state = env.reset(derive_seed(seed, "pretrain-reset", episode));
  int ep_steps = 0;
  std::vector<double> a(act);
  for (int i = 0; i < n; ++i) {
    const auto o = env.observation(state);
    for (auto& x : a) x = rollout.uniform(-1.0, 1.0);
    const sim::StepResult sr = env.step(state, a);
    const sim::MarkerSet ms = env.markers(sr.state);
    const auto fn = features::phi(ms, ms.base_vx, ms.base_vy, schema);
    std::copy(o.begin(), o.end(), obs.data() + static_cast<size_t>(i) * obs.cols);
    std::copy(a.begin(), a.end(),
              actions.data() + static_cast<size_t>(i) * act);
    std::copy(fn.begin(), fn.end(),
              feat_next.data() + static_cast<size_t>(i) * feat_next.cols);
    ++ep_steps;
    if (sr.terminated || ep_steps >= env.spec().episode_length) {
      state = env.reset(derive_seed(seed, "pretrain-reset", ++episode));
      ep_steps = 0;
    } else {
      state = sr.state;
    }
  }

  PretrainStats stats;
  stats.transitions = n;

  Rng shuffle_rng(derive_seed(seed, "pretrain-shuffle"));
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  auto inv_epoch = [&] {
    std::shuffle(order.begin(), order.end(), shuffle_rng.engine());
    double acc = 0.0;
    int batches = 0;
    for (int start = 0; start < n; start += cfg.batch) {
      const int stop = std::min(n, start + cfg.batch);
      std::vector<int> idx(order.begin() + start, order.begin() + stop);
      acc += g_inv.update(gather_rows(obs, idx), gather_rows(feat_next, idx),
                          gather_rows(actions, idx));
      ++batches;
    }
    return acc / batches;
  };
  std::tie(stats.inv_epochs, stats.inv_loss) =
      fit_until_plateau(cfg, inv_epoch);
  g_inv.mark_pretrained();

  const Tensor demo_feats = stack_features(demos);
  if (demo_feats.cols != schema.dim())
    throw DimensionError("pretrain: demonstration width does not match schema");
  const int dn = demo_feats.rows;
  std::vector<int> dorder(dn);
  for (int i = 0; i < dn; ++i) dorder[i] = i;
  auto vae_epoch = [&] {
    std::shuffle(dorder.begin(), dorder.end(), shuffle_rng.engine());
    double acc = 0.0;
    int batches = 0;
    for (int start = 0; start < dn; start += cfg.batch) {
      const int stop = std::min(dn, start + cfg.batch);
      std::vector<int> idx(dorder.begin() + start, dorder.begin() + stop);
      acc += vae.update(gather_rows(demo_feats, idx));
      ++batches;
    }
    return acc / batches;
  };
  std::tie(stats.vae_epochs, stats.vae_loss) =
      fit_until_plateau(cfg, vae_epoch);
  vae.mark_pretrained();
  return stats;
}

}  // namespace coil::imit
