#include "nlw/kernels.hpp"

#include <cstdlib>
#include <cstring>

namespace nlw::kernels {

namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
}

double wss_scalar(const double* w, const double* v, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += w[i] * v[i] * v[i];
    return s;
}

void matvec_scalar(const double* a, const double* x, double* y,
                   std::size_t rows, std::size_t cols) {
    for (std::size_t r = 0; r < rows; ++r)
        y[r] = dot_scalar(a + r * cols, x, cols);
}

void poly_scalar(const double* c, std::size_t deg, const double* x, double* y,
                 std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        double acc = c[deg];
        for (std::size_t k = deg; k-- > 0;) acc = acc * x[i] + c[k];
        y[i] = acc;
    }
}

void axpy_scalar(double a, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

const Ops scalar_ops = {dot_scalar, wss_scalar, matvec_scalar,
                        poly_scalar, axpy_scalar, "scalar"};

} // namespace

const Ops& scalar() { return scalar_ops; }

const Ops& active() {
    static const Ops* chosen = [] {
        const char* env = std::getenv("NLW_KERNELS");
        if (env && std::strcmp(env, "scalar") == 0) return &scalar_ops;
#if defined(__x86_64__) || defined(_M_X64)
        if (env && std::strcmp(env, "avx2") == 0) return &avx2();
        if (avx2_supported()) return &avx2();
#endif
        return &scalar_ops;
    }();
    return *chosen;
}

} // namespace nlw::kernels
