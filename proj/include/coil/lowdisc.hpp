#pragma once

#include <cstdint>

#include "coil/tensor.hpp"

namespace coil::lowdisc {

// n points of a Halton sequence in [0,1)^dim with a seeded Cranley-Patterson
// rotation (per-dimension random shift modulo 1). Deterministic in the seed.
Tensor scrambled_halton(int n, int dim, std::uint64_t seed);

}  // namespace coil::lowdisc
