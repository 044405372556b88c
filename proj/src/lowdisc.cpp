#include "coil/lowdisc.hpp"

#include <cmath>

#include "coil/errors.hpp"
#include "coil/rng.hpp"

namespace coil::lowdisc {

namespace {
int nth_prime(int idx) {
  static const int primes[] = {2,  3,  5,  7,  11, 13, 17, 19, 23, 29,
                               31, 37, 41, 43, 47, 53, 59, 61, 67, 71,
                               73, 79, 83, 89, 97, 101, 103, 107, 109, 113};
  if (idx < 0 || idx >= static_cast<int>(std::size(primes)))
    throw BoundsViolation("scrambled_halton: dimension too large");
  return primes[idx];
}

double radical_inverse(std::uint64_t i, int base) {
  double f = 1.0;
  double result = 0.0;
  while (i > 0) {
    f /= base;
    result += f * static_cast<double>(i % base);
    i /= base;
  }
  return result;
}
}  // namespace

Tensor scrambled_halton(int n, int dim, std::uint64_t seed) {
  if (n < 1 || dim < 1)
    throw BoundsViolation("scrambled_halton: n and dim must be positive");
  Rng rng(derive_seed(seed, "halton-shift"));
  std::vector<double> shift(dim);
  for (double& s : shift) s = rng.uniform(0.0, 1.0);

  Tensor out(n, dim);
  for (int d = 0; d < dim; ++d) {
    const int base = nth_prime(d);
    for (int i = 0; i < n; ++i) {
      // Skip index 0 so the unrotated sequence never emits the origin.
      double u = radical_inverse(static_cast<std::uint64_t>(i) + 1, base);
      u += shift[d];
      u -= std::floor(u);
      out.at(i, d) = u < 1.0 ? u : 0.0;
    }
  }
  return out;
}

}  // namespace coil::lowdisc
