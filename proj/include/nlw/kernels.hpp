#ifndef NLW_KERNELS_HPP
#define NLW_KERNELS_HPP

#include <cstddef>

// Inner-loop kernels used by the spectral transforms, norms and the
// pseudospectral evaluation of the nonlinearity.  A scalar reference
// implementation always exists; an AVX2 variant is selected at runtime
// when the CPU supports it.  Both variants are equivalence-tested.

namespace nlw::kernels {

struct Ops {
    // sum_i a[i] * b[i]
    double (*dot)(const double* a, const double* b, std::size_t n);
    // sum_i w[i] * v[i] * v[i]
    double (*weighted_sq_sum)(const double* w, const double* v, std::size_t n);
    // y = A x, A row-major (rows x cols)
    void (*matvec)(const double* a, const double* x, double* y,
                   std::size_t rows, std::size_t cols);
    // y[i] = c[0] + c[1]*x[i] + ... + c[deg]*x[i]^deg  (Horner)
    void (*poly_eval)(const double* c, std::size_t deg, const double* x,
                      double* y, std::size_t n);
    // y[i] += a * x[i]
    void (*axpy)(double a, const double* x, double* y, std::size_t n);
    const char* name;
};

const Ops& scalar();

#if defined(__x86_64__) || defined(_M_X64)
const Ops& avx2();
bool avx2_supported();
#endif

// Best variant for the running CPU; override with NLW_KERNELS=scalar.
const Ops& active();

} // namespace nlw::kernels

#endif
