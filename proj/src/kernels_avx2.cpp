#include "nlw/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

namespace nlw::kernels {

namespace {

inline double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d sh = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        acc = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i),
                              acc);
    double s = hsum(acc);
    for (; i < n; ++i) s += a[i] * b[i];
    return s;
}

double wss_avx2(const double* w, const double* v, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d vv = _mm256_loadu_pd(v + i);
        acc = _mm256_fmadd_pd(_mm256_mul_pd(_mm256_loadu_pd(w + i), vv), vv,
                              acc);
    }
    double s = hsum(acc);
    for (; i < n; ++i) s += w[i] * v[i] * v[i];
    return s;
}

void matvec_avx2(const double* a, const double* x, double* y, std::size_t rows,
                 std::size_t cols) {
    for (std::size_t r = 0; r < rows; ++r)
        y[r] = dot_avx2(a + r * cols, x, cols);
}

void poly_avx2(const double* c, std::size_t deg, const double* x, double* y,
               std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d xv = _mm256_loadu_pd(x + i);
        __m256d acc = _mm256_set1_pd(c[deg]);
        for (std::size_t k = deg; k-- > 0;)
            acc = _mm256_fmadd_pd(acc, xv, _mm256_set1_pd(c[k]));
        _mm256_storeu_pd(y + i, acc);
    }
    for (; i < n; ++i) {
        double acc = c[deg];
        for (std::size_t k = deg; k-- > 0;) acc = acc * x[i] + c[k];
        y[i] = acc;
    }
}

void axpy_avx2(double a, const double* x, double* y, std::size_t n) {
    __m256d av = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(
            y + i, _mm256_fmadd_pd(av, _mm256_loadu_pd(x + i),
                                   _mm256_loadu_pd(y + i)));
    for (; i < n; ++i) y[i] += a * x[i];
}

const Ops avx2_ops = {dot_avx2, wss_avx2, matvec_avx2,
                      poly_avx2, axpy_avx2, "avx2"};

} // namespace

const Ops& avx2() { return avx2_ops; }

bool avx2_supported() {
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
}

} // namespace nlw::kernels

#endif
