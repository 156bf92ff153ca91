// AVX2 + FMA kernel variants. This translation unit is the only one compiled
// with -mavx2 -mfma; it must stay free of code that could run on non-AVX2
// hosts (the dispatcher guards every entry point).

#include <immintrin.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "wasn/kernels.hpp"

namespace wasn::kernels::detail {

void scale_update_vector(const cplx* y, std::size_t n, double alpha, cplx* u);
constexpr std::size_t kStackVecAvx = 256;

cplx cdot_conj_avx2(const cplx* a, const cplx* b, std::size_t n) {
  // Lanes hold [re0, im0, re1, im1]. acc1 accumulates a.*b (pairs sum to the
  // real part: ar*br + ai*bi), acc2 accumulates swap(a).*b (pairs difference
  // to the imaginary part: ar*bi - ai*br).
  __m256d acc1 = _mm256_setzero_pd();
  __m256d acc2 = _mm256_setzero_pd();
  std::size_t i = 0;
  const double* pa = reinterpret_cast<const double*>(a);
  const double* pb = reinterpret_cast<const double*>(b);
  for (; i + 2 <= n; i += 2) {
    __m256d av = _mm256_loadu_pd(pa + 2 * i);
    __m256d bv = _mm256_loadu_pd(pb + 2 * i);
    acc1 = _mm256_fmadd_pd(av, bv, acc1);
    __m256d as = _mm256_permute_pd(av, 0b0101);
    acc2 = _mm256_fmadd_pd(as, bv, acc2);
  }
  alignas(32) double t1[4], t2[4];
  _mm256_store_pd(t1, acc1);
  _mm256_store_pd(t2, acc2);
  double re = (t1[0] + t1[1]) + (t1[2] + t1[3]);
  double im = (t2[1] - t2[0]) + (t2[3] - t2[2]);
  for (; i < n; ++i) {
    const double ar = a[i].real(), ai = a[i].imag();
    const double br = b[i].real(), bi = b[i].imag();
    re += ar * br + ai * bi;
    im += ar * bi - ai * br;
  }
  return {re, im};
}

void herm_rank1_update_avx2(cplx* r, std::size_t n, const cplx* y, double beta,
                            double alpha) {
  cplx ubuf[kStackVecAvx];
  std::vector<cplx> uheap;
  cplx* u = ubuf;
  if (n > kStackVecAvx) {
    uheap.resize(n);
    u = uheap.data();
  }
  scale_update_vector(y, n, alpha, u);
  const __m256d betav = _mm256_set1_pd(beta);
  const double* pu = reinterpret_cast<const double*>(u);
  for (std::size_t j = 0; j < n; ++j) {
    const double ujr = u[j].real(), ujm = u[j].imag();
    // prod = u_i * conj(u_j): even lanes uir*ujr + uii*ujm, odd lanes
    // uii*ujr - uir*ujm. Plain multiplies plus a single addsub keep the
    // rounding pattern symmetric in (i, j); the fused op is only the beta
    // blend, whose inputs are already conjugate images.
    const __m256d cr = _mm256_set1_pd(ujr);
    const __m256d cm = _mm256_set1_pd(-ujm);
    double* col = reinterpret_cast<double*>(r + j * n);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
      __m256d uv = _mm256_loadu_pd(pu + 2 * i);
      __m256d us = _mm256_permute_pd(uv, 0b0101);
      __m256d a = _mm256_mul_pd(uv, cr);
      __m256d b = _mm256_mul_pd(us, cm);
      __m256d prod = _mm256_addsub_pd(a, b);
      __m256d rv = _mm256_loadu_pd(col + 2 * i);
      _mm256_storeu_pd(col + 2 * i, _mm256_fmadd_pd(rv, betav, prod));
    }
    for (; i < n; ++i) {
      const double uir = u[i].real(), uii = u[i].imag();
      const double p1 = uir * ujr;
      const double p2 = uii * ujm;
      const double p3 = uii * ujr;
      const double p4 = uir * ujm;
      const double pr = p1 + p2;
      const double pi = p3 - p4;
      cplx* rc = r + j * n + i;
      // Same single rounding as the fmadd in the vector body, so elements
      // split across tail and body stay conjugate images to the bit.
      *rc = {std::fma(beta, rc->real(), pr), std::fma(beta, rc->imag(), pi)};
    }
  }
}

void apply_window_avx2(const double* x, const double* w, double* out,
                       std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(out + i, _mm256_mul_pd(_mm256_loadu_pd(x + i),
                                            _mm256_loadu_pd(w + i)));
  }
  for (; i < n; ++i) out[i] = x[i] * w[i];
}

void overlap_add_avx2(double* acc, const double* x, const double* w,
                      std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d prod = _mm256_mul_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(w + i));
    _mm256_storeu_pd(acc + i, _mm256_add_pd(_mm256_loadu_pd(acc + i), prod));
  }
  for (; i < n; ++i) acc[i] += x[i] * w[i];
}

}  // namespace wasn::kernels::detail
