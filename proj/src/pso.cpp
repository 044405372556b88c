#include "coil/pso.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "coil/errors.hpp"
#include "coil/rng.hpp"

namespace coil::opt {

PsoResult pso_maximize(const BatchObjective& objective, int dim, int particles,
                       int iters, std::uint64_t seed) {
  if (dim < 1 || particles < 1 || iters < 0)
    throw BoundsViolation("pso: dim and particles must be positive");
  constexpr double kW = 0.729;
  constexpr double kC = 1.49445;

  Rng rng(derive_seed(seed, "pso"));
  Tensor x(particles, dim);
  Tensor v(particles, dim);
  for (int p = 0; p < particles; ++p)
    for (int d = 0; d < dim; ++d) {
      x.at(p, d) = rng.uniform(0.0, 1.0);
      v.at(p, d) = rng.uniform(-0.1, 0.1);
    }

  std::vector<double> score = objective(x);
  if (static_cast<int>(score.size()) != particles)
    throw DimensionError("pso: objective returned wrong batch size");
  Tensor pbest = x;
  std::vector<double> pbest_val = score;
  int g = 0;
  for (int p = 1; p < particles; ++p)
    if (pbest_val[p] > pbest_val[g]) g = p;
  PsoResult out;
  out.best_point.assign(&pbest.at(g, 0), &pbest.at(g, 0) + dim);
  out.best_value = pbest_val[g];

  for (int it = 0; it < iters; ++it) {
    for (int p = 0; p < particles; ++p)
      for (int d = 0; d < dim; ++d) {
        const double r1 = rng.uniform(0.0, 1.0);
        const double r2 = rng.uniform(0.0, 1.0);
        double vel = kW * v.at(p, d) + kC * r1 * (pbest.at(p, d) - x.at(p, d)) +
                     kC * r2 * (out.best_point[d] - x.at(p, d));
        double pos = x.at(p, d) + vel;
        if (pos < 0.0) {
          pos = 0.0;
          vel = 0.0;
        } else if (pos > 1.0) {
          pos = 1.0;
          vel = 0.0;
        }
        x.at(p, d) = pos;
        v.at(p, d) = vel;
      }
    score = objective(x);
    for (int p = 0; p < particles; ++p) {
      if (score[p] > pbest_val[p]) {
        pbest_val[p] = score[p];
        for (int d = 0; d < dim; ++d) pbest.at(p, d) = x.at(p, d);
      }
      if (score[p] > out.best_value) {
        out.best_value = score[p];
        out.best_point.assign(&x.at(p, 0), &x.at(p, 0) + dim);
      }
    }
  }
  return out;
}

}  // namespace coil::opt
