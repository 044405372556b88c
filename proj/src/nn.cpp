#include "coil/nn.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "coil/errors.hpp"
#include "coil/kernels.hpp"
#include "coil/rng.hpp"

namespace coil::nn {

namespace {
// istream extraction of hexfloat is not portable; strtod is.
bool parse_double(const std::string& tok, double* out) {
  const char* s = tok.c_str();
  char* end = nullptr;
  *out = std::strtod(s, &end);
  return end != s && *end == '\0';
}
}  // namespace

Mlp::Mlp(std::string name, std::vector<int> sizes, Activation act,
         std::uint64_t seed)
    : name_(std::move(name)), sizes_(std::move(sizes)), act_(act) {
  if (sizes_.size() < 2) throw ShapeError("mlp needs at least in and out size");
  for (int s : sizes_)
    if (s <= 0) throw ShapeError("mlp layer sizes must be positive");
  Rng rng(seed);
  for (size_t l = 0; l + 1 < sizes_.size(); ++l) {
    const int fan_in = sizes_[l];
    const int fan_out = sizes_[l + 1];
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    Tensor w(fan_out, fan_in);
    w.fill_uniform(rng, -bound, bound);
    Tensor b(1, fan_out);
    b.fill_uniform(rng, -bound, bound);
    weights_.emplace_back(name_ + ".W" + std::to_string(l), std::move(w));
    biases_.emplace_back(name_ + ".b" + std::to_string(l), std::move(b));
  }
}

Tensor Mlp::forward(const Tensor& x) const {
  return forward_cached(x, nullptr);
}

Tensor Mlp::forward_cached(const Tensor& x,
                           std::vector<Tensor>* preacts) const {
  if (x.cols != in_dim()) throw ShapeError("mlp forward: input width mismatch");
  if (preacts) preacts->clear();
  Tensor h = x;
  for (size_t l = 0; l < weights_.size(); ++l) {
    const Tensor& w = weights_[l].value;
    const Tensor& b = biases_[l].value;
    Tensor z(h.rows, w.rows);
    kernels::gemm_auto(false, true, h.rows, w.rows, h.cols, h.data(), h.cols,
                       w.data(), w.cols, z.data(), z.cols, false);
    for (int i = 0; i < z.rows; ++i)
      for (int j = 0; j < z.cols; ++j) z.at(i, j) += b.at(0, j);
    const bool last = l + 1 == weights_.size();
    if (!last) {
      if (preacts) preacts->push_back(z);
      if (act_ == Activation::ReLU) {
        for (double& v : z.v) v = v > 0.0 ? v : 0.0;
      } else {
        for (double& v : z.v) v = std::tanh(v);
      }
    }
    h = std::move(z);
  }
  return h;
}

ad::Tape::NodeId Mlp::forward_tape(ad::Tape& tape, ad::Tape::NodeId x) {
  ad::Tape::NodeId h = x;
  for (size_t l = 0; l < weights_.size(); ++l) {
    const ad::Tape::NodeId w = tape.param(weights_[l]);
    const ad::Tape::NodeId b = tape.param(biases_[l]);
    h = tape.add_rowvec(tape.matmul(h, w, false, true), b);
    if (l + 1 < weights_.size())
      h = act_ == Activation::ReLU ? tape.relu(h) : tape.tanh(h);
  }
  return h;
}

std::vector<ad::Parameter*> Mlp::params() {
  std::vector<ad::Parameter*> out;
  for (size_t l = 0; l < weights_.size(); ++l) {
    out.push_back(&weights_[l]);
    out.push_back(&biases_[l]);
  }
  return out;
}

void Mlp::zero_grad() {
  for (auto* p : params()) p->zero_grad();
}

Adam::Adam(std::vector<ad::Parameter*> params, AdamConfig cfg)
    : params_(std::move(params)), cfg_(cfg) {
  for (auto* p : params_) {
    m_.push_back(Tensor::zeros(p->value.rows, p->value.cols));
    v_.push_back(Tensor::zeros(p->value.rows, p->value.cols));
  }
}

bool Adam::step() {
  for (auto* p : params_)
    if (!p->grad.finite()) {
      ++skipped_;
      for (auto* q : params_) q->zero_grad();
      return false;
    }
  ++t_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  for (size_t i = 0; i < params_.size(); ++i) {
    ad::Parameter& p = *params_[i];
    for (size_t j = 0; j < p.value.v.size(); ++j) {
      const double g = p.grad.v[j];
      m_[i].v[j] = cfg_.beta1 * m_[i].v[j] + (1.0 - cfg_.beta1) * g;
      v_[i].v[j] = cfg_.beta2 * v_[i].v[j] + (1.0 - cfg_.beta2) * g * g;
      const double mhat = m_[i].v[j] / bc1;
      const double vhat = v_[i].v[j] / bc2;
      p.value.v[j] -= cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps);
      if (cfg_.weight_decay != 0.0)
        p.value.v[j] -= cfg_.lr * cfg_.weight_decay * p.value.v[j];
    }
    p.zero_grad();
  }
  return true;
}

void Adam::save_state(Checkpoint& ck, const std::string& prefix) const {
  for (size_t i = 0; i < params_.size(); ++i) {
    ck.put(prefix + ".m." + params_[i]->name, m_[i]);
    ck.put(prefix + ".v." + params_[i]->name, v_[i]);
  }
  ck.put(prefix + ".t", static_cast<double>(t_));
}

void Adam::load_state(const Checkpoint& ck, const std::string& prefix) {
  for (size_t i = 0; i < params_.size(); ++i) {
    for (auto [slot, dst] : {std::pair{".m.", &m_[i]}, {".v.", &v_[i]}}) {
      const std::string key = prefix + slot + params_[i]->name;
      auto it = ck.tensors.find(key);
      if (it == ck.tensors.end())
        throw IoError("checkpoint missing tensor: " + key);
      if (it->second.rows != dst->rows || it->second.cols != dst->cols)
        throw ShapeError("checkpoint shape mismatch for " + key);
      *dst = it->second;
    }
  }
  t_ = static_cast<long>(ck.scalar(prefix + ".t"));
}

void Checkpoint::collect(const std::vector<ad::Parameter*>& params) {
  for (const auto* p : params) tensors[p->name] = p->value;
}

void Checkpoint::restore(const std::vector<ad::Parameter*>& params) const {
  for (auto* p : params) {
    auto it = tensors.find(p->name);
    if (it == tensors.end())
      throw IoError("checkpoint missing tensor: " + p->name);
    if (it->second.rows != p->value.rows || it->second.cols != p->value.cols)
      throw ShapeError("checkpoint shape mismatch for " + p->name);
    p->value = it->second;
    p->zero_grad();
  }
}

double Checkpoint::scalar(const std::string& name) const {
  auto it = scalars.find(name);
  if (it == scalars.end()) throw IoError("checkpoint missing scalar: " + name);
  return it->second;
}

void Checkpoint::save(std::ostream& out) const {
  out << "coimit-ckpt 1\n";
  out << std::hexfloat;
  for (const auto& [name, t] : tensors) {
    out << "tensor " << name << ' ' << std::dec << t.rows << ' ' << t.cols
        << '\n'
        << std::hexfloat;
    for (int i = 0; i < t.rows; ++i) {
      for (int j = 0; j < t.cols; ++j) {
        if (j) out << ' ';
        out << t.at(i, j);
      }
      out << '\n';
    }
  }
  for (const auto& [name, x] : scalars)
    out << "scalar " << name << ' ' << x << '\n';
  out << "end\n";
}

Checkpoint Checkpoint::load(std::istream& in) {
  Checkpoint ck;
  std::string line;
  if (!std::getline(in, line) || line != "coimit-ckpt 1")
    throw IoError("not a checkpoint file (bad header)");
  while (std::getline(in, line)) {
    if (line == "end") return ck;
    std::istringstream ls(line);
    std::string kind, name;
    ls >> kind >> name;
    if (kind == "tensor") {
      int rows = -1, cols = -1;
      ls >> rows >> cols;
      if (!ls || rows < 0 || cols < 0)
        throw IoError("bad tensor header in checkpoint: " + line);
      Tensor t(rows, cols);
      for (int i = 0; i < rows; ++i) {
        if (!std::getline(in, line))
          throw IoError("truncated tensor in checkpoint: " + name);
        std::istringstream row(line);
        std::string tok;
        for (int j = 0; j < cols; ++j) {
          if (!(row >> tok) || !parse_double(tok, &t.at(i, j)))
            throw IoError("bad tensor row in checkpoint: " + name);
        }
      }
      ck.tensors[name] = std::move(t);
    } else if (kind == "scalar") {
      std::string tok;
      double x = 0.0;
      if (!(ls >> tok) || !parse_double(tok, &x))
        throw IoError("bad scalar in checkpoint: " + line);
      ck.scalars[name] = x;
    } else if (!kind.empty()) {
      throw IoError("unknown checkpoint entry: " + line);
    }
  }
  throw IoError("checkpoint missing end marker");
}

void Checkpoint::save_file(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open checkpoint for writing: " + path);
  save(out);
  if (!out) throw IoError("write failed for checkpoint: " + path);
}

Checkpoint Checkpoint::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open checkpoint: " + path);
  return load(in);
}

}  // namespace coil::nn
