#include "coil/kernels.hpp"

#include <atomic>

namespace coil::kernels {

namespace {
std::atomic<bool> g_parallel{true};

// Below these sizes the OpenMP fork/join overhead dominates; stay serial.
constexpr long kGemmParallelMinFlops = 1 << 16;
constexpr std::size_t kMapParallelMinCount = 1 << 14;

inline double dot(const double* a, const double* b, int k) {
  double s = 0.0;
  for (int i = 0; i < k; ++i) s += a[i] * b[i];
  return s;
}

// One output row of C. The accumulation order per element is fixed here and
// shared by the serial and OpenMP variants.
inline void gemm_row(bool trans_a, bool trans_b, int i, int n, int k,
                     const double* a, int lda, const double* b, int ldb,
                     double* c, int ldc, bool accumulate) {
  double* crow = c + static_cast<std::size_t>(i) * ldc;
  if (!accumulate) {
    for (int j = 0; j < n; ++j) crow[j] = 0.0;
  }
  if (!trans_a && !trans_b) {
    const double* arow = a + static_cast<std::size_t>(i) * lda;
    for (int p = 0; p < k; ++p) {
      const double av = arow[p];
      const double* brow = b + static_cast<std::size_t>(p) * ldb;
      for (int j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  } else if (!trans_a && trans_b) {
    const double* arow = a + static_cast<std::size_t>(i) * lda;
    for (int j = 0; j < n; ++j)
      crow[j] += dot(arow, b + static_cast<std::size_t>(j) * ldb, k);
  } else if (trans_a && !trans_b) {
    for (int p = 0; p < k; ++p) {
      const double av = a[static_cast<std::size_t>(p) * lda + i];
      const double* brow = b + static_cast<std::size_t>(p) * ldb;
      for (int j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  } else {
    for (int p = 0; p < k; ++p) {
      const double av = a[static_cast<std::size_t>(p) * lda + i];
      for (int j = 0; j < n; ++j)
        crow[j] += av * b[static_cast<std::size_t>(j) * ldb + p];
    }
  }
}

inline double sqdist(const double* a, const double* b, int d) {
  double s = 0.0;
  for (int i = 0; i < d; ++i) {
    const double diff = a[i] - b[i];
    s += diff * diff;
  }
  return s;
}

inline double apply(Binary op, double a, double b) {
  switch (op) {
    case Binary::Add: return a + b;
    case Binary::Sub: return a - b;
    default: return a * b;
  }
}
}  // namespace

bool parallel_enabled() { return g_parallel.load(std::memory_order_relaxed); }
void set_parallel(bool on) { g_parallel.store(on, std::memory_order_relaxed); }

void gemm_serial(bool trans_a, bool trans_b, int m, int n, int k,
                 const double* a, int lda, const double* b, int ldb, double* c,
                 int ldc, bool accumulate) {
  for (int i = 0; i < m; ++i)
    gemm_row(trans_a, trans_b, i, n, k, a, lda, b, ldb, c, ldc, accumulate);
}

void gemm_omp(bool trans_a, bool trans_b, int m, int n, int k, const double* a,
              int lda, const double* b, int ldb, double* c, int ldc,
              bool accumulate) {
#pragma omp parallel for schedule(static)
  for (int i = 0; i < m; ++i)
    gemm_row(trans_a, trans_b, i, n, k, a, lda, b, ldb, c, ldc, accumulate);
}

void gemm_auto(bool trans_a, bool trans_b, int m, int n, int k, const double* a,
               int lda, const double* b, int ldb, double* c, int ldc,
               bool accumulate) {
  const long flops = 2L * m * n * k;
  if (parallel_enabled() && flops >= kGemmParallelMinFlops && m > 1)
    gemm_omp(trans_a, trans_b, m, n, k, a, lda, b, ldb, c, ldc, accumulate);
  else
    gemm_serial(trans_a, trans_b, m, n, k, a, lda, b, ldb, c, ldc, accumulate);
}

void pairwise_sqdist_serial(const double* x, int n, const double* y, int m,
                            int d, double* out) {
  for (int i = 0; i < n; ++i) {
    const double* xi = x + static_cast<std::size_t>(i) * d;
    double* row = out + static_cast<std::size_t>(i) * m;
    for (int j = 0; j < m; ++j)
      row[j] = sqdist(xi, y + static_cast<std::size_t>(j) * d, d);
  }
}

void pairwise_sqdist_omp(const double* x, int n, const double* y, int m, int d,
                         double* out) {
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) {
    const double* xi = x + static_cast<std::size_t>(i) * d;
    double* row = out + static_cast<std::size_t>(i) * m;
    for (int j = 0; j < m; ++j)
      row[j] = sqdist(xi, y + static_cast<std::size_t>(j) * d, d);
  }
}

void pairwise_sqdist_auto(const double* x, int n, const double* y, int m, int d,
                          double* out) {
  if (parallel_enabled() && static_cast<long>(n) * m * d >= kGemmParallelMinFlops && n > 1)
    pairwise_sqdist_omp(x, n, y, m, d, out);
  else
    pairwise_sqdist_serial(x, n, y, m, d, out);
}

void map_binary_serial(Binary op, const double* a, const double* b, double* out,
                       std::size_t count) {
  for (std::size_t i = 0; i < count; ++i) out[i] = apply(op, a[i], b[i]);
}

void map_binary_omp(Binary op, const double* a, const double* b, double* out,
                    std::size_t count) {
  const long long total = static_cast<long long>(count);
#pragma omp parallel for schedule(static)
  for (long long i = 0; i < total; ++i) out[i] = apply(op, a[i], b[i]);
}

void map_binary_auto(Binary op, const double* a, const double* b, double* out,
                     std::size_t count) {
  if (parallel_enabled() && count >= kMapParallelMinCount)
    map_binary_omp(op, a, b, out, count);
  else
    map_binary_serial(op, a, b, out, count);
}

}  // namespace coil::kernels
