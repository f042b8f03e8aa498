#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace smokegram::kernels {

// Hot arithmetic loops behind one dispatch table. Every backend must produce
// bit-identical doubles: vector variants may only vectorize across independent
// output elements, never across a reduction, and must use separate mul/add
// (no FMA). Equivalence is enforced by tests/kernels_test.cpp, so backend
// selection can never change a training result.
struct Ops {
    const char* name;

    // c(m x n) = a(m x k) * b(k x n). Accumulation over k runs in ascending
    // order for every element.
    void (*matmul)(const double* a, const double* b, double* c,
                   std::size_t m, std::size_t k, std::size_t n);

    // m[r][c] += v[c] for every row.
    void (*add_row_vector)(double* mat, const double* v,
                           std::size_t rows, std::size_t cols);

    // y[i] = x[i] > 0 ? x[i] : +0.0
    void (*relu)(const double* x, double* y, std::size_t n);

    // dz[i] = z[i] > 0 ? dy[i] : 0.0
    void (*relu_backward)(const double* z, const double* dy, double* dz,
                          std::size_t n);

    // c[i] = a[i] * b[i]
    void (*hadamard)(const double* a, const double* b, double* c, std::size_t n);

    // out[c] = sum over rows of mat[r][c], rows accumulated in order.
    void (*column_sums)(const double* mat, double* out,
                        std::size_t rows, std::size_t cols);

    // One bias-corrected update step per element:
    //   m = b1*m + (1-b1)*g;  v = b2*v + (1-b2)*g*g
    //   p -= lr * (m/(1-b1t)) / (sqrt(v/(1-b2t)) + eps)
    void (*adam_update)(double* p, const double* g, double* m, double* v,
                        std::size_t n, double lr, double b1, double b2,
                        double eps, double b1t, double b2t);
};

extern const Ops scalar_ops;
#if defined(__x86_64__) || defined(_M_X64)
extern const Ops avx2_ops;
#endif
#if defined(__aarch64__)
extern const Ops neon_ops;
#endif

// Backend in use. First call picks the best supported one unless the
// SMOKEGRAM_KERNELS environment variable ("scalar", "avx2", "neon", "auto")
// or set_backend() said otherwise.
const Ops& active();

// Force a backend by name; "auto" re-runs detection. Throws Error for names
// this build does not support.
void set_backend(const std::string& name);

std::vector<const Ops*> available();

} // namespace smokegram::kernels
