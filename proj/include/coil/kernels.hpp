#pragma once

#include <cstddef>

namespace coil::kernels {

// Dense numeric kernels used by the autodiff engine, the transport solver and
// the surrogate model. Every kernel has a serial reference implementation and
// an OpenMP variant that parallelizes over independent output elements while
// keeping the per-element accumulation order identical, so both produce
// bit-identical results for any thread count. The *_auto entry points pick a
// variant from the global switch plus a size threshold.

bool parallel_enabled();
void set_parallel(bool on);

// C (m x n) = op(A) * op(B) [+ C if accumulate]. Row-major, op is optional
// transpose. lda/ldb/ldc are leading dimensions (row strides).
void gemm_serial(bool trans_a, bool trans_b, int m, int n, int k,
                 const double* a, int lda, const double* b, int ldb, double* c,
                 int ldc, bool accumulate);
void gemm_omp(bool trans_a, bool trans_b, int m, int n, int k, const double* a,
              int lda, const double* b, int ldb, double* c, int ldc,
              bool accumulate);
void gemm_auto(bool trans_a, bool trans_b, int m, int n, int k, const double* a,
               int lda, const double* b, int ldb, double* c, int ldc,
               bool accumulate);

// D (n x m): squared Euclidean distances between rows of X (n x d) and
// rows of Y (m x d).
void pairwise_sqdist_serial(const double* x, int n, const double* y, int m,
                            int d, double* out);
void pairwise_sqdist_omp(const double* x, int n, const double* y, int m, int d,
                         double* out);
void pairwise_sqdist_auto(const double* x, int n, const double* y, int m, int d,
                          double* out);

// out[i] = f(a[i], b[i]) elementwise over flat arrays.
enum class Binary { Add, Sub, Mul };
void map_binary_serial(Binary op, const double* a, const double* b, double* out,
                       std::size_t count);
void map_binary_omp(Binary op, const double* a, const double* b, double* out,
                    std::size_t count);
void map_binary_auto(Binary op, const double* a, const double* b, double* out,
                     std::size_t count);

}  // namespace coil::kernels
