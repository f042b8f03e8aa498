// NEON kernels (aarch64). Same rules as the AVX2 backend: lanes hold
// independent outputs, explicit mul/add only, bit-identical to scalar.

#if defined(__aarch64__)

#include <arm_neon.h>

#include <cmath>
#include <cstring>

#include "smokegram/kernels.hpp"

namespace smokegram::kernels {
namespace {

void matmul_neon(const double* a, const double* b, double* c,
                 std::size_t m, std::size_t k, std::size_t n) {
    std::memset(c, 0, m * n * sizeof(double));
    const std::size_t n2 = n & ~std::size_t{1};
    for (std::size_t i = 0; i < m; ++i) {
        double* crow = c + i * n;
        for (std::size_t kk = 0; kk < k; ++kk) {
            const double aik = a[i * k + kk];
            const double* brow = b + kk * n;
            const float64x2_t av = vdupq_n_f64(aik);
            std::size_t j = 0;
            for (; j < n2; j += 2) {
                float64x2_t cv = vld1q_f64(crow + j);
                cv = vaddq_f64(cv, vmulq_f64(av, vld1q_f64(brow + j)));
                vst1q_f64(crow + j, cv);
            }
            for (; j < n; ++j) {
                crow[j] += aik * brow[j];
            }
        }
    }
}

void add_row_vector_neon(double* mat, const double* v,
                         std::size_t rows, std::size_t cols) {
    const std::size_t c2 = cols & ~std::size_t{1};
    for (std::size_t r = 0; r < rows; ++r) {
        double* row = mat + r * cols;
        std::size_t c = 0;
        for (; c < c2; c += 2) {
            vst1q_f64(row + c, vaddq_f64(vld1q_f64(row + c), vld1q_f64(v + c)));
        }
        for (; c < cols; ++c) {
            row[c] += v[c];
        }
    }
}

void relu_neon(const double* x, double* y, std::size_t n) {
    const float64x2_t zero = vdupq_n_f64(0.0);
    const std::size_t n2 = n & ~std::size_t{1};
    std::size_t i = 0;
    for (; i < n2; i += 2) {
        const float64x2_t xv = vld1q_f64(x + i);
        const uint64x2_t mask = vcgtq_f64(xv, zero);
        vst1q_f64(y + i, vreinterpretq_f64_u64(
                             vandq_u64(vreinterpretq_u64_f64(xv), mask)));
    }
    for (; i < n; ++i) {
        y[i] = x[i] > 0.0 ? x[i] : 0.0;
    }
}

void relu_backward_neon(const double* z, const double* dy, double* dz,
                        std::size_t n) {
    const float64x2_t zero = vdupq_n_f64(0.0);
    const std::size_t n2 = n & ~std::size_t{1};
    std::size_t i = 0;
    for (; i < n2; i += 2) {
        const uint64x2_t mask = vcgtq_f64(vld1q_f64(z + i), zero);
        vst1q_f64(dz + i, vreinterpretq_f64_u64(vandq_u64(
                              vreinterpretq_u64_f64(vld1q_f64(dy + i)), mask)));
    }
    for (; i < n; ++i) {
        dz[i] = z[i] > 0.0 ? dy[i] : 0.0;
    }
}

void hadamard_neon(const double* a, const double* b, double* c, std::size_t n) {
    const std::size_t n2 = n & ~std::size_t{1};
    std::size_t i = 0;
    for (; i < n2; i += 2) {
        vst1q_f64(c + i, vmulq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
    }
    for (; i < n; ++i) {
        c[i] = a[i] * b[i];
    }
}

void column_sums_neon(const double* mat, double* out,
                      std::size_t rows, std::size_t cols) {
    std::memset(out, 0, cols * sizeof(double));
    const std::size_t c2 = cols & ~std::size_t{1};
    for (std::size_t r = 0; r < rows; ++r) {
        const double* row = mat + r * cols;
        std::size_t c = 0;
        for (; c < c2; c += 2) {
            vst1q_f64(out + c, vaddq_f64(vld1q_f64(out + c), vld1q_f64(row + c)));
        }
        for (; c < cols; ++c) {
            out[c] += row[c];
        }
    }
}

void adam_update_neon(double* p, const double* g, double* m, double* v,
                      std::size_t n, double lr, double b1, double b2,
                      double eps, double b1t, double b2t) {
    const double one_minus_b1 = 1.0 - b1;
    const double one_minus_b2 = 1.0 - b2;
    const double mc = 1.0 - b1t;
    const double vc = 1.0 - b2t;

    const float64x2_t b1v = vdupq_n_f64(b1);
    const float64x2_t b2v = vdupq_n_f64(b2);
    const float64x2_t omb1 = vdupq_n_f64(one_minus_b1);
    const float64x2_t omb2 = vdupq_n_f64(one_minus_b2);
    const float64x2_t mcv = vdupq_n_f64(mc);
    const float64x2_t vcv = vdupq_n_f64(vc);
    const float64x2_t lrv = vdupq_n_f64(lr);
    const float64x2_t epsv = vdupq_n_f64(eps);

    const std::size_t n2 = n & ~std::size_t{1};
    std::size_t i = 0;
    for (; i < n2; i += 2) {
        const float64x2_t gv = vld1q_f64(g + i);
        float64x2_t mv = vld1q_f64(m + i);
        float64x2_t vv = vld1q_f64(v + i);
        mv = vaddq_f64(vmulq_f64(b1v, mv), vmulq_f64(omb1, gv));
        vv = vaddq_f64(vmulq_f64(b2v, vv), vmulq_f64(omb2, vmulq_f64(gv, gv)));
        vst1q_f64(m + i, mv);
        vst1q_f64(v + i, vv);
        const float64x2_t mhat = vdivq_f64(mv, mcv);
        const float64x2_t vhat = vdivq_f64(vv, vcv);
        const float64x2_t denom = vaddq_f64(vsqrtq_f64(vhat), epsv);
        const float64x2_t step = vmulq_f64(lrv, vdivq_f64(mhat, denom));
        vst1q_f64(p + i, vsubq_f64(vld1q_f64(p + i), step));
    }
    for (; i < n; ++i) {
        const double gi = g[i];
        m[i] = b1 * m[i] + one_minus_b1 * gi;
        v[i] = b2 * v[i] + one_minus_b2 * (gi * gi);
        const double mhat = m[i] / mc;
        const double vhat = v[i] / vc;
        p[i] = p[i] - lr * (mhat / (std::sqrt(vhat) + eps));
    }
}

} // namespace

const Ops neon_ops = {
    "neon",
    matmul_neon,
    add_row_vector_neon,
    relu_neon,
    relu_backward_neon,
    hadamard_neon,
    column_sums_neon,
    adam_update_neon,
};

} // namespace smokegram::kernels

#endif // aarch64
