#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "coil/features.hpp"

namespace coil::transport {

// Uniformly weighted empirical distribution over position-slice feature
// vectors.
struct EmpiricalDistribution {
  std::vector<std::vector<double>> points;

  int n() const { return static_cast<int>(points.size()); }
  int dim() const { return points.empty() ? 0 : static_cast<int>(points[0].size()); }
};

struct PlanEntry {
  int from = 0;
  int to = 0;
  double weight = 0.0;
};

struct TransportPlan {
  std::vector<PlanEntry> entries;
  double cost = 0.0;
};

inline constexpr int kDefaultSubsampleCap = 500;

// Exact Wasserstein-1 distance under the Euclidean ground metric, solved as
// a transportation LP with the network (transportation) simplex. Returns the
// optimal objective and an optimal coupling.
std::pair<double, TransportPlan> wasserstein_exact(
    const EmpiricalDistribution& a, const EmpiricalDistribution& b);

// Uniform sample of up to n states (without replacement; everything if the
// pool is smaller) from the pooled position slices of `trajs`.
EmpiricalDistribution subsample(
    const std::vector<features::FeatureTrajectory>& trajs, int n,
    std::uint64_t seed);

// Mean exact distance over all unordered demo pairs, each demonstration as
// its own distribution (subsampled with a fixed seed when longer than the
// cap).
double mean_pairwise_demo_distance(
    const std::vector<features::FeatureTrajectory>& demos);

}  // namespace coil::transport
