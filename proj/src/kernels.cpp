#include "wasn/kernels.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace wasn::kernels {

namespace detail {

// Dimensions in this codebase are small (tens of channels); updates beyond
// this fall back to a heap-allocated scratch vector.
constexpr std::size_t kStackVec = 256;

cplx cdot_conj_scalar(const cplx* a, const cplx* b, std::size_t n) {
  double re = 0.0, im = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double ar = a[i].real(), ai = a[i].imag();
    const double br = b[i].real(), bi = b[i].imag();
    re += ar * br + ai * bi;
    im += ar * bi - ai * br;
  }
  return {re, im};
}

// Shared by both backends: u = sqrt(alpha) * y, so the update is
// R <- beta*R + u u^H. Forming each product from the same rounded pair
// (u_i, u_j) keeps R Hermitian to the bit; scaling conj(y_j) by alpha per
// column would not (round(a*y_i)*y_j != round(a*y_j)*y_i in general).
void scale_update_vector(const cplx* y, std::size_t n, double alpha, cplx* u) {
  if (alpha < 0.0)
    throw std::invalid_argument("herm_rank1_update: alpha must be >= 0");
  const double s = std::sqrt(alpha);
  for (std::size_t i = 0; i < n; ++i) u[i] = {s * y[i].real(), s * y[i].imag()};
}

void herm_rank1_update_scalar(cplx* r, std::size_t n, const cplx* y,
                              double beta, double alpha) {
  cplx ubuf[kStackVec];
  std::vector<cplx> uheap;
  cplx* u = ubuf;
  if (n > kStackVec) {
    uheap.resize(n);
    u = uheap.data();
  }
  scale_update_vector(y, n, alpha, u);
  for (std::size_t j = 0; j < n; ++j) {
    const double ujr = u[j].real(), ujm = u[j].imag();
    cplx* col = r + j * n;
    for (std::size_t i = 0; i < n; ++i) {
      const double uir = u[i].real(), uii = u[i].imag();
      const double p1 = uir * ujr;
      const double p2 = uii * ujm;
      const double p3 = uii * ujr;
      const double p4 = uir * ujm;
      const double pr = p1 + p2;
      const double pi = p3 - p4;
      col[i] = {beta * col[i].real() + pr, beta * col[i].imag() + pi};
    }
  }
}

void apply_window_scalar(const double* x, const double* w, double* out,
                         std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = x[i] * w[i];
}

void overlap_add_scalar(double* acc, const double* x, const double* w,
                        std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) acc[i] += x[i] * w[i];
}

#ifdef WASN_HAVE_AVX2_TU
cplx cdot_conj_avx2(const cplx* a, const cplx* b, std::size_t n);
void herm_rank1_update_avx2(cplx* r, std::size_t n, const cplx* y, double beta,
                            double alpha);
void apply_window_avx2(const double* x, const double* w, double* out,
                       std::size_t n);
void overlap_add_avx2(double* acc, const double* x, const double* w,
                      std::size_t n);
#endif

bool cpu_has_avx2() {
#if defined(__GNUC__) && (defined(__x86_64__) || defined(__i386__))
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

struct Table {
  cplx (*cdot)(const cplx*, const cplx*, std::size_t);
  void (*rank1)(cplx*, std::size_t, const cplx*, double, double);
  void (*window)(const double*, const double*, double*, std::size_t);
  void (*ola)(double*, const double*, const double*, std::size_t);
  Backend which;
};

constexpr Table kScalar = {cdot_conj_scalar, herm_rank1_update_scalar,
                           apply_window_scalar, overlap_add_scalar,
                           Backend::scalar};
#ifdef WASN_HAVE_AVX2_TU
constexpr Table kAvx2 = {cdot_conj_avx2, herm_rank1_update_avx2,
                         apply_window_avx2, overlap_add_avx2, Backend::avx2};
#endif

const Table* pick_default() {
#ifdef WASN_HAVE_AVX2_TU
  if (cpu_has_avx2()) return &kAvx2;
#endif
  return &kScalar;
}

const Table* g_table = nullptr;

const Table* table() {
  if (!g_table) g_table = pick_default();
  return g_table;
}

}  // namespace detail

Backend active_backend() { return detail::table()->which; }

const char* backend_name() {
  return active_backend() == Backend::avx2 ? "avx2" : "scalar";
}

void force_backend(Backend b) {
  if (b == Backend::scalar) {
    detail::g_table = &detail::kScalar;
    return;
  }
#ifdef WASN_HAVE_AVX2_TU
  if (detail::cpu_has_avx2()) {
    detail::g_table = &detail::kAvx2;
    return;
  }
#endif
  throw std::runtime_error("force_backend: avx2 unavailable on this CPU");
}

void reset_backend() { detail::g_table = detail::pick_default(); }

cplx cdot_conj(const cplx* a, const cplx* b, std::size_t n) {
  return detail::table()->cdot(a, b, n);
}

void herm_rank1_update(cplx* r, std::size_t n, const cplx* y, double beta,
                       double alpha) {
  detail::table()->rank1(r, n, y, beta, alpha);
}

void apply_window(const double* x, const double* w, double* out,
                  std::size_t n) {
  detail::table()->window(x, w, out, n);
}

void overlap_add(double* acc, const double* x, const double* w,
                 std::size_t n) {
  detail::table()->ola(acc, x, w, n);
}

}  // namespace wasn::kernels
