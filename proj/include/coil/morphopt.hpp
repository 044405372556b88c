#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "coil/cmaes.hpp"
#include "coil/gp.hpp"
#include "coil/pso.hpp"
#include "coil/sim/types.hpp"

namespace coil::morph {

struct MorphEntry {
  sim::MorphologyVector xi;
  std::vector<double> episode_distances;  // NaN marks a failed episode
  bool completed = false;
};

// Append-only record of evaluated morphologies and their per-episode
// distribution distances. At most one entry (the newest) may be open.
class MorphDataset {
 public:
  void begin_entry(const sim::MorphologyVector& xi);
  void add_episode_distance(double d);
  void complete_entry();
  void add_completed(const sim::MorphologyVector& xi,
                     const std::vector<double>& distances);

  int size() const { return static_cast<int>(entries_.size()); }
  int completed_count() const;
  bool has_open_entry() const;
  const MorphEntry& entry(int i) const { return entries_[i]; }
  const std::vector<MorphEntry>& entries() const { return entries_; }

 private:
  std::vector<MorphEntry> entries_;
};

struct Targets {
  Tensor x{0, 0};              // normalized morphologies, one row per entry
  std::vector<double> y;       // mean per-episode distance
  std::vector<int> entry_index;
};

// Mean distribution distance per completed morphology. Failed episodes are
// left out of the mean; an entry with no finite distance is skipped entirely.
Targets targets(const MorphDataset& ds, const sim::MorphologyBounds& bounds);

// Completed entry with the lowest target. Returns nothing on an empty set.
std::optional<std::pair<sim::MorphologyVector, double>> incumbent_best(
    const MorphDataset& ds, const sim::MorphologyBounds& bounds);

class Strategy {
 public:
  virtual ~Strategy() = default;
  virtual sim::MorphologyVector propose(const MorphDataset& ds,
                                        const sim::MorphologyBounds& bounds) = 0;
  virtual std::string name() const = 0;
};

// No adaptation: always the configured morphology (pure-imitation baseline).
class FixedStrategy : public Strategy {
 public:
  explicit FixedStrategy(sim::MorphologyVector xi) : xi_(std::move(xi)) {}
  sim::MorphologyVector propose(const MorphDataset&,
                                const sim::MorphologyBounds&) override;
  std::string name() const override { return "fixed"; }

 private:
  sim::MorphologyVector xi_;
};

class RandomStrategy : public Strategy {
 public:
  explicit RandomStrategy(std::uint64_t seed) : seed_(seed) {}
  sim::MorphologyVector propose(const MorphDataset& ds,
                                const sim::MorphologyBounds& bounds) override;
  std::string name() const override { return "random"; }

 private:
  std::uint64_t seed_;
  int round_ = 0;
};

struct BoConfig {
  double beta = 2.0;
  int grid_size = 2048;
  gp::GpConfig gp;
};

// Lower-confidence-bound Bayesian optimization over a fresh low-discrepancy
// candidate grid plus every morphology evaluated so far.
class BoStrategy : public Strategy {
 public:
  BoStrategy(BoConfig cfg, std::uint64_t seed) : cfg_(cfg), seed_(seed) {}
  sim::MorphologyVector propose(const MorphDataset& ds,
                                const sim::MorphologyBounds& bounds) override;
  std::string name() const override { return "bo"; }

  const BoConfig& config() const { return cfg_; }
  const gp::SurrogateModel* last_model() const { return model_.get(); }

 private:
  BoConfig cfg_;
  std::uint64_t seed_;
  int round_ = 0;
  std::unique_ptr<gp::SurrogateModel> model_;
};

// Generational CMA-ES adapter. Contract: every proposal is evaluated (one
// completed dataset entry) before the next propose call.
class CmaesStrategy : public Strategy {
 public:
  explicit CmaesStrategy(std::uint64_t seed) : seed_(seed) {}
  sim::MorphologyVector propose(const MorphDataset& ds,
                                const sim::MorphologyBounds& bounds) override;
  std::string name() const override { return "cmaes"; }

 private:
  std::uint64_t seed_;
  std::unique_ptr<opt::Cmaes> es_;
  Tensor pending_{0, 0};
  int next_row_ = 0;
};

// Q-function exploitation baseline: epsilon-greedy between a uniform random
// morphology and a swarm maximization of the supplied batched value function
// over normalized morphology space.
class QPsoStrategy : public Strategy {
 public:
  struct Config {
    int particles = 250;
    int iters = 250;
    long budget_steps = 1'000'000;
  };
  QPsoStrategy(Config cfg, std::uint64_t seed) : cfg_(cfg), seed_(seed) {}

  void set_objective(opt::BatchObjective objective);
  void set_step_count(long steps) { step_count_ = steps; }
  double epsilon() const;

  sim::MorphologyVector propose(const MorphDataset& ds,
                                const sim::MorphologyBounds& bounds) override;
  std::string name() const override { return "q_pso"; }

 private:
  Config cfg_;
  std::uint64_t seed_;
  int round_ = 0;
  long step_count_ = 0;
  opt::BatchObjective objective_;
};

// Strategy factory for the config layer. `fixed_xi` seeds FixedStrategy and
// is required for name == "fixed".
std::unique_ptr<Strategy> make_strategy(const std::string& name,
                                        const sim::MorphologyVector& fixed_xi,
                                        const BoConfig& bo,
                                        const QPsoStrategy::Config& qcfg,
                                        std::uint64_t seed);

}  // namespace coil::morph
