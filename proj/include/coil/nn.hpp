#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "coil/tape.hpp"

namespace coil::nn {

enum class Activation { ReLU, Tanh };

// Fully connected network: linear layers with the chosen hidden activation,
// linear output. `sizes` lists in, hidden..., out; weights are initialized
// fan-in uniform. Weight matrices are stored (out x in), so the forward pass
// is x * W^T + b.
class Mlp {
 public:
  Mlp(std::string name, std::vector<int> sizes,
      Activation act, std::uint64_t seed);

  Tensor forward(const Tensor& x) const;
  // Also records pre-activation values of each hidden layer (for the
  // activation-mask path used by the critic's gradient penalty).
  Tensor forward_cached(const Tensor& x, std::vector<Tensor>* preacts) const;
  ad::Tape::NodeId forward_tape(ad::Tape& tape, ad::Tape::NodeId x);

  std::vector<ad::Parameter*> params();
  void zero_grad();

  int in_dim() const { return sizes_.front(); }
  int out_dim() const { return sizes_.back(); }
  int layer_count() const { return static_cast<int>(weights_.size()); }
  Activation activation() const { return act_; }
  const std::string& name() const { return name_; }

  ad::Parameter& weight(int layer) { return weights_[layer]; }
  ad::Parameter& bias(int layer) { return biases_[layer]; }
  const ad::Parameter& weight(int layer) const { return weights_[layer]; }
  const ad::Parameter& bias(int layer) const { return biases_[layer]; }

 private:
  std::string name_;
  std::vector<int> sizes_;
  Activation act_;
  std::vector<ad::Parameter> weights_;
  std::vector<ad::Parameter> biases_;
};

struct AdamConfig {
  double lr = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;  // decoupled, applied as p -= lr * wd * p
};

struct Checkpoint;

// Adam over a fixed parameter list. step() consumes and zeroes accumulated
// gradients; a non-finite gradient skips the whole update and counts the
// event instead of corrupting the moments.
class Adam {
 public:
  Adam(std::vector<ad::Parameter*> params, AdamConfig cfg);
  bool step();
  long skipped() const { return skipped_; }
  const AdamConfig& config() const { return cfg_; }
  void set_lr(double lr) { cfg_.lr = lr; }

  void save_state(Checkpoint& ck, const std::string& prefix) const;
  void load_state(const Checkpoint& ck, const std::string& prefix);

 private:
  std::vector<ad::Parameter*> params_;
  AdamConfig cfg_;
  std::vector<Tensor> m_;
  std::vector<Tensor> v_;
  long t_ = 0;
  long skipped_ = 0;
};

// Checkpoint serialization: named tensors and scalars, hexfloat encoded so a
// save/load round trip is bit exact. Loading is strict about names/shapes.
struct Checkpoint {
  std::map<std::string, Tensor> tensors;
  std::map<std::string, double> scalars;

  void put(const std::string& name, const Tensor& t) { tensors[name] = t; }
  void put(const std::string& name, double x) { scalars[name] = x; }
  void collect(const std::vector<ad::Parameter*>& params);
  // Writes values back into `params`; every parameter must be present with a
  // matching shape.
  void restore(const std::vector<ad::Parameter*>& params) const;
  double scalar(const std::string& name) const;

  void save(std::ostream& out) const;
  static Checkpoint load(std::istream& in);
  void save_file(const std::string& path) const;
  static Checkpoint load_file(const std::string& path);
};

}  // namespace coil::nn
