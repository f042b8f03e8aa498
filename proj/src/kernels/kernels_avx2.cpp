// AVX2 kernels. Vector lanes cover independent output elements only, with
// explicit mul/add (never FMA), so results are bit-identical to the scalar
// backend. This TU is compiled with -mavx2 and without -mfma.

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

#include <cmath>
#include <cstring>

#include "smokegram/kernels.hpp"

namespace smokegram::kernels {
namespace {

void matmul_avx2(const double* a, const double* b, double* c,
                 std::size_t m, std::size_t k, std::size_t n) {
    std::memset(c, 0, m * n * sizeof(double));
    const std::size_t n4 = n & ~std::size_t{3};
    for (std::size_t i = 0; i < m; ++i) {
        double* crow = c + i * n;
        for (std::size_t kk = 0; kk < k; ++kk) {
            const double aik = a[i * k + kk];
            const double* brow = b + kk * n;
            const __m256d av = _mm256_set1_pd(aik);
            std::size_t j = 0;
            for (; j < n4; j += 4) {
                __m256d cv = _mm256_loadu_pd(crow + j);
                __m256d bv = _mm256_loadu_pd(brow + j);
                cv = _mm256_add_pd(cv, _mm256_mul_pd(av, bv));
                _mm256_storeu_pd(crow + j, cv);
            }
            for (; j < n; ++j) {
                crow[j] += aik * brow[j];
            }
        }
    }
}

void add_row_vector_avx2(double* mat, const double* v,
                         std::size_t rows, std::size_t cols) {
    const std::size_t c4 = cols & ~std::size_t{3};
    for (std::size_t r = 0; r < rows; ++r) {
        double* row = mat + r * cols;
        std::size_t c = 0;
        for (; c < c4; c += 4) {
            _mm256_storeu_pd(row + c, _mm256_add_pd(_mm256_loadu_pd(row + c),
                                                    _mm256_loadu_pd(v + c)));
        }
        for (; c < cols; ++c) {
            row[c] += v[c];
        }
    }
}

void relu_avx2(const double* x, double* y, std::size_t n) {
    const __m256d zero = _mm256_setzero_pd();
    const std::size_t n4 = n & ~std::size_t{3};
    std::size_t i = 0;
    for (; i < n4; i += 4) {
        const __m256d xv = _mm256_loadu_pd(x + i);
        // x & (x > 0) yields x or +0.0, matching the scalar ternary bitwise.
        _mm256_storeu_pd(y + i, _mm256_and_pd(xv, _mm256_cmp_pd(xv, zero, _CMP_GT_OQ)));
    }
    for (; i < n; ++i) {
        y[i] = x[i] > 0.0 ? x[i] : 0.0;
    }
}

void relu_backward_avx2(const double* z, const double* dy, double* dz,
                        std::size_t n) {
    const __m256d zero = _mm256_setzero_pd();
    const std::size_t n4 = n & ~std::size_t{3};
    std::size_t i = 0;
    for (; i < n4; i += 4) {
        const __m256d mask = _mm256_cmp_pd(_mm256_loadu_pd(z + i), zero, _CMP_GT_OQ);
        _mm256_storeu_pd(dz + i, _mm256_and_pd(_mm256_loadu_pd(dy + i), mask));
    }
    for (; i < n; ++i) {
        dz[i] = z[i] > 0.0 ? dy[i] : 0.0;
    }
}

void hadamard_avx2(const double* a, const double* b, double* c, std::size_t n) {
    const std::size_t n4 = n & ~std::size_t{3};
    std::size_t i = 0;
    for (; i < n4; i += 4) {
        _mm256_storeu_pd(c + i, _mm256_mul_pd(_mm256_loadu_pd(a + i),
                                              _mm256_loadu_pd(b + i)));
    }
    for (; i < n; ++i) {
        c[i] = a[i] * b[i];
    }
}

void column_sums_avx2(const double* mat, double* out,
                      std::size_t rows, std::size_t cols) {
    std::memset(out, 0, cols * sizeof(double));
    const std::size_t c4 = cols & ~std::size_t{3};
    for (std::size_t r = 0; r < rows; ++r) {
        const double* row = mat + r * cols;
        std::size_t c = 0;
        for (; c < c4; c += 4) {
            _mm256_storeu_pd(out + c, _mm256_add_pd(_mm256_loadu_pd(out + c),
                                                    _mm256_loadu_pd(row + c)));
        }
        for (; c < cols; ++c) {
            out[c] += row[c];
        }
    }
}

void adam_update_avx2(double* p, const double* g, double* m, double* v,
                      std::size_t n, double lr, double b1, double b2,
                      double eps, double b1t, double b2t) {
    const double one_minus_b1 = 1.0 - b1;
    const double one_minus_b2 = 1.0 - b2;
    const double mc = 1.0 - b1t;
    const double vc = 1.0 - b2t;

    const __m256d b1v = _mm256_set1_pd(b1);
    const __m256d b2v = _mm256_set1_pd(b2);
    const __m256d omb1 = _mm256_set1_pd(one_minus_b1);
    const __m256d omb2 = _mm256_set1_pd(one_minus_b2);
    const __m256d mcv = _mm256_set1_pd(mc);
    const __m256d vcv = _mm256_set1_pd(vc);
    const __m256d lrv = _mm256_set1_pd(lr);
    const __m256d epsv = _mm256_set1_pd(eps);

    const std::size_t n4 = n & ~std::size_t{3};
    std::size_t i = 0;
    for (; i < n4; i += 4) {
        const __m256d gv = _mm256_loadu_pd(g + i);
        __m256d mv = _mm256_loadu_pd(m + i);
        __m256d vv = _mm256_loadu_pd(v + i);
        mv = _mm256_add_pd(_mm256_mul_pd(b1v, mv), _mm256_mul_pd(omb1, gv));
        vv = _mm256_add_pd(_mm256_mul_pd(b2v, vv),
                           _mm256_mul_pd(omb2, _mm256_mul_pd(gv, gv)));
        _mm256_storeu_pd(m + i, mv);
        _mm256_storeu_pd(v + i, vv);
        const __m256d mhat = _mm256_div_pd(mv, mcv);
        const __m256d vhat = _mm256_div_pd(vv, vcv);
        const __m256d denom = _mm256_add_pd(_mm256_sqrt_pd(vhat), epsv);
        const __m256d step = _mm256_mul_pd(lrv, _mm256_div_pd(mhat, denom));
        _mm256_storeu_pd(p + i, _mm256_sub_pd(_mm256_loadu_pd(p + i), step));
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

const Ops avx2_ops = {
    "avx2",
    matmul_avx2,
    add_row_vector_avx2,
    relu_avx2,
    relu_backward_avx2,
    hadamard_avx2,
    column_sums_avx2,
    adam_update_avx2,
};

} // namespace smokegram::kernels

#endif // x86_64
