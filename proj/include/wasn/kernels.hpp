#pragma once

#include <complex>
#include <cstddef>

namespace wasn::kernels {

using cplx = std::complex<double>;

enum class Backend { scalar, avx2 };

// Backend in effect for subsequent kernel calls. Dispatch is resolved once
// from CPU feature bits; force_backend overrides it (tests use this to check
// scalar/SIMD equivalence) and throws if the requested ISA is unavailable.
Backend active_backend();
const char* backend_name();
void force_backend(Backend b);
void reset_backend();

// sum_i conj(a[i]) * b[i]
cplx cdot_conj(const cplx* a, const cplx* b, std::size_t n);

// Hermitian rank-1 update on a dense column-major n x n matrix:
//   R <- beta * R + alpha * y y^H
// Every column is updated in full; the scalar and SIMD paths use the same
// multiply/add shape, which keeps R exactly Hermitian (the (i,j) and (j,i)
// computations are conjugate images of each other, rounding included).
void herm_rank1_update(cplx* r, std::size_t n, const cplx* y, double beta,
                       double alpha);

// out[i] = x[i] * w[i]
void apply_window(const double* x, const double* w, double* out,
                  std::size_t n);

// acc[i] += x[i] * w[i]
void overlap_add(double* acc, const double* x, const double* w,
                 std::size_t n);

}  // namespace wasn::kernels
