#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <vector>

#include "coil/kernels.hpp"

// Times the serial reference kernels against the OpenMP variants and checks
// they agree bitwise, as the tape relies on that for determinism.

namespace {

using clock_type = std::chrono::steady_clock;

template <typename Fn>
double seconds_for(Fn&& fn, int reps) {
  fn();  // warm up
  const auto t0 = clock_type::now();
  for (int r = 0; r < reps; ++r) fn();
  return std::chrono::duration<double>(clock_type::now() - t0).count() / reps;
}

void fill(std::vector<double>& v, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (double& x : v) x = dist(rng);
}

int check_equal(const std::vector<double>& a, const std::vector<double>& b) {
  for (size_t i = 0; i < a.size(); ++i)
    if (a[i] != b[i]) return static_cast<int>(i);
  return -1;
}

}  // namespace

int main() {
  std::mt19937_64 rng(12345);
  std::printf("%-28s %12s %12s %9s\n", "kernel", "serial (ms)", "openmp (ms)",
              "speedup");

  bool all_equal = true;
  for (int n : {64, 128, 256, 512}) {
    std::vector<double> a(n * n), b(n * n), c_s(n * n), c_p(n * n);
    fill(a, rng);
    fill(b, rng);
    const int reps = n <= 128 ? 50 : 8;

    const double ts = seconds_for(
        [&] {
          coil::kernels::gemm_serial(false, false, n, n, n, a.data(), n,
                                     b.data(), n, c_s.data(), n, false);
        },
        reps);
    const double tp = seconds_for(
        [&] {
          coil::kernels::gemm_omp(false, false, n, n, n, a.data(), n, b.data(),
                                  n, c_p.data(), n, false);
        },
        reps);
    const int bad = check_equal(c_s, c_p);
    if (bad >= 0) {
      std::printf("gemm %dx%d MISMATCH at %d\n", n, n, bad);
      all_equal = false;
    }
    char label[64];
    std::snprintf(label, sizeof label, "gemm %dx%d", n, n);
    std::printf("%-28s %12.3f %12.3f %8.2fx\n", label, ts * 1e3, tp * 1e3,
                ts / tp);
  }

  for (int n : {200, 500, 1000}) {
    const int d = 16;
    std::vector<double> x(n * d), y(n * d), o_s(n * n), o_p(n * n);
    fill(x, rng);
    fill(y, rng);
    const int reps = 20;
    const double ts = seconds_for(
        [&] {
          coil::kernels::pairwise_sqdist_serial(x.data(), n, y.data(), n, d,
                                                o_s.data());
        },
        reps);
    const double tp = seconds_for(
        [&] {
          coil::kernels::pairwise_sqdist_omp(x.data(), n, y.data(), n, d,
                                             o_p.data());
        },
        reps);
    const int bad = check_equal(o_s, o_p);
    if (bad >= 0) {
      std::printf("sqdist %d MISMATCH at %d\n", n, bad);
      all_equal = false;
    }
    char label[64];
    std::snprintf(label, sizeof label, "pairwise_sqdist %dx%d d=%d", n, n, d);
    std::printf("%-28s %12.3f %12.3f %8.2fx\n", label, ts * 1e3, tp * 1e3,
                ts / tp);
  }

  if (!all_equal) {
    std::printf("FAIL: parallel kernels diverged from the reference\n");
    return 1;
  }
  std::printf("serial and OpenMP kernels agree bitwise on all cases\n");
  return 0;
}
