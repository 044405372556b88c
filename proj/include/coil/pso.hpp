#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "coil/tensor.hpp"

namespace coil::opt {

// Batched objective: one value per row of the input matrix.
using BatchObjective = std::function<std::vector<double>(const Tensor&)>;

struct PsoResult {
  std::vector<double> best_point;
  double best_value;
};

// Global-best particle swarm over the unit cube, maximizing the objective.
// Constriction-style coefficients (w = 0.729, c1 = c2 = 1.49445); positions
// clipped to bounds with the offending velocity component zeroed.
PsoResult pso_maximize(const BatchObjective& objective, int dim, int particles,
                       int iters, std::uint64_t seed);

}  // namespace coil::opt
