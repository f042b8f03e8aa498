// Reference kernels. Each loop is written in the exact evaluation order the
// vector backends must reproduce; keep them boring.

#include <cmath>
#include <cstring>

#include "smokegram/kernels.hpp"

namespace smokegram::kernels {
namespace {

void matmul_scalar(const double* a, const double* b, double* c,
                   std::size_t m, std::size_t k, std::size_t n) {
    std::memset(c, 0, m * n * sizeof(double));
    for (std::size_t i = 0; i < m; ++i) {
        double* crow = c + i * n;
        for (std::size_t kk = 0; kk < k; ++kk) {
            const double aik = a[i * k + kk];
            const double* brow = b + kk * n;
            for (std::size_t j = 0; j < n; ++j) {
                crow[j] += aik * brow[j];
            }
        }
    }
}

void add_row_vector_scalar(double* mat, const double* v,
                           std::size_t rows, std::size_t cols) {
    for (std::size_t r = 0; r < rows; ++r) {
        double* row = mat + r * cols;
        for (std::size_t c = 0; c < cols; ++c) {
            row[c] += v[c];
        }
    }
}

void relu_scalar(const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        y[i] = x[i] > 0.0 ? x[i] : 0.0;
    }
}

void relu_backward_scalar(const double* z, const double* dy, double* dz,
                          std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        dz[i] = z[i] > 0.0 ? dy[i] : 0.0;
    }
}

void hadamard_scalar(const double* a, const double* b, double* c, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        c[i] = a[i] * b[i];
    }
}

void column_sums_scalar(const double* mat, double* out,
                        std::size_t rows, std::size_t cols) {
    std::memset(out, 0, cols * sizeof(double));
    for (std::size_t r = 0; r < rows; ++r) {
        const double* row = mat + r * cols;
        for (std::size_t c = 0; c < cols; ++c) {
            out[c] += row[c];
        }
    }
}

void adam_update_scalar(double* p, const double* g, double* m, double* v,
                        std::size_t n, double lr, double b1, double b2,
                        double eps, double b1t, double b2t) {
    const double one_minus_b1 = 1.0 - b1;
    const double one_minus_b2 = 1.0 - b2;
    const double mc = 1.0 - b1t;
    const double vc = 1.0 - b2t;
    for (std::size_t i = 0; i < n; ++i) {
        const double gi = g[i];
        m[i] = b1 * m[i] + one_minus_b1 * gi;
        v[i] = b2 * v[i] + one_minus_b2 * (gi * gi);
        const double mhat = m[i] / mc;
        const double vhat = v[i] / vc;
        p[i] = p[i] - lr * (mhat / (std::sqrt(vhat) + eps));
    }
}

} // namespace

const Ops scalar_ops = {
    "scalar",
    matmul_scalar,
    add_row_vector_scalar,
    relu_scalar,
    relu_backward_scalar,
    hadamard_scalar,
    column_sums_scalar,
    adam_update_scalar,
};

} // namespace smokegram::kernels
