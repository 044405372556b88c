#pragma once

#include <cstddef>
#include <vector>

#include "coil/errors.hpp"
#include "coil/rng.hpp"

namespace coil::rl {

// One environment transition. Rewards are computed by the discriminator at
// insertion time; the feature vectors are kept so a config flag can relabel
// rewards later without touching the simulator.
struct TransitionRecord {
  std::vector<double> s;        // observation
  std::vector<double> a;        // action in [-1, 1]
  std::vector<double> s_next;
  std::vector<double> xi_norm;  // morphology, normalized to the unit cube
  std::vector<double> feat;     // phi(s_t)
  std::vector<double> feat_next;
  double reward = 0.0;
  bool done = false;  // true terminal only; time-limit cuts still bootstrap
};

// Fixed-capacity ring buffer shared across morphologies: switching the body
// never evicts old experience, only capacity does.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0) throw BoundsViolation("replay capacity must be positive");
    records_.reserve(capacity < 4096 ? capacity : 4096);
  }

  void add(TransitionRecord r) {
    if (records_.size() < capacity_) {
      records_.push_back(std::move(r));
    } else {
      records_[cursor_] = std::move(r);
    }
    cursor_ = (cursor_ + 1) % capacity_;
  }

  std::size_t size() const { return records_.size(); }
  std::size_t capacity() const { return capacity_; }
  const TransitionRecord& at(std::size_t i) const { return records_[i]; }
  TransitionRecord& at(std::size_t i) { return records_[i]; }

  std::vector<std::size_t> sample_indices(std::size_t batch, Rng& rng) const {
    if (records_.empty()) throw EmptyBatch("replay buffer is empty");
    std::vector<std::size_t> idx(batch);
    for (std::size_t i = 0; i < batch; ++i) idx[i] = rng.index(records_.size());
    return idx;
  }

 private:
  std::size_t capacity_;
  std::size_t cursor_ = 0;
  std::vector<TransitionRecord> records_;
};

}  // namespace coil::rl
