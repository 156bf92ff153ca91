#include <doctest.h>

#include <complex>
#include <vector>

#include "wasn/kernels.hpp"
#include "wasn/rng.hpp"

namespace k = wasn::kernels;
using k::cplx;
using wasn::Rng;

namespace {

std::vector<cplx> random_cvec(Rng& rng, std::size_t n) {
  std::vector<cplx> v(n);
  for (auto& x : v) x = rng.cnormal();
  return v;
}

std::vector<double> random_rvec(Rng& rng, std::size_t n) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.normal();
  return v;
}

// Sizes straddling the vector width and remainder paths.
const std::size_t kSizes[] = {0, 1, 2, 3, 4, 5, 7, 8, 16, 33, 257, 1024};

struct BackendGuard {
  ~BackendGuard() { k::reset_backend(); }
};

bool have_avx2() {
  try {
    BackendGuard g;
    k::force_backend(k::Backend::avx2);
    return true;
  } catch (...) {
    return false;
  }
}

}  // namespace

TEST_CASE("cdot_conj matches naive accumulation") {
  Rng rng(1);
  for (std::size_t n : kSizes) {
    auto a = random_cvec(rng, n);
    auto b = random_cvec(rng, n);
    cplx naive = 0;
    for (std::size_t i = 0; i < n; ++i) naive += std::conj(a[i]) * b[i];
    cplx got = k::cdot_conj(a.data(), b.data(), n);
    CHECK(std::abs(got - naive) <= 1e-12 * std::max(1.0, std::abs(naive)));
  }
}

TEST_CASE("scalar and avx2 backends agree") {
  if (!have_avx2()) {
    MESSAGE("avx2 unavailable; dispatch test skipped");
    return;
  }
  BackendGuard guard;
  Rng rng(2);
  for (std::size_t n : kSizes) {
    auto a = random_cvec(rng, n);
    auto b = random_cvec(rng, n);
    auto x = random_rvec(rng, n);
    auto w = random_rvec(rng, n);
    std::vector<cplx> r0(n * n), r1;
    for (auto& e : r0) e = rng.cnormal();
    // Hermitianize the start matrix so the preservation contract applies.
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t i = 0; i < j; ++i)
        r0[j * n + i] = std::conj(r0[i * n + j]);
      r0[j * n + j] = r0[j * n + j].real();
    }
    r1 = r0;

    k::force_backend(k::Backend::scalar);
    cplx dot_s = k::cdot_conj(a.data(), b.data(), n);
    k::herm_rank1_update(r0.data(), n, a.data(), 0.967, 0.033);
    std::vector<double> out_s(n), acc_s(n, 0.5);
    k::apply_window(x.data(), w.data(), out_s.data(), n);
    k::overlap_add(acc_s.data(), x.data(), w.data(), n);

    k::force_backend(k::Backend::avx2);
    cplx dot_v = k::cdot_conj(a.data(), b.data(), n);
    k::herm_rank1_update(r1.data(), n, a.data(), 0.967, 0.033);
    std::vector<double> out_v(n), acc_v(n, 0.5);
    k::apply_window(x.data(), w.data(), out_v.data(), n);
    k::overlap_add(acc_v.data(), x.data(), w.data(), n);

    CHECK(std::abs(dot_s - dot_v) <= 1e-12 * std::max(1.0, std::abs(dot_s)));
    for (std::size_t i = 0; i < n * n; ++i)
      CHECK(std::abs(r0[i] - r1[i]) <= 1e-13 * std::max(1.0, std::abs(r0[i])));
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(out_s[i] == out_v[i]);
      CHECK(acc_s[i] == acc_v[i]);
    }
  }
}

TEST_CASE("rank1 update preserves Hermitian symmetry to the bit") {
  BackendGuard guard;
  Rng rng(3);
  for (auto backend : {k::Backend::scalar, k::Backend::avx2}) {
    if (backend == k::Backend::avx2 && !have_avx2()) continue;
    k::force_backend(backend);
    const std::size_t n = 13;
    std::vector<cplx> r(n * n, cplx(0, 0));
    for (std::size_t j = 0; j < n; ++j) r[j * n + j] = 1.0;
    for (int t = 0; t < 500; ++t) {
      auto y = random_cvec(rng, n);
      k::herm_rank1_update(r.data(), n, y.data(), 0.967, 0.033);
    }
    for (std::size_t j = 0; j < n; ++j) {
      CHECK(r[j * n + j].imag() == 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        CHECK(r[j * n + i].real() == r[i * n + j].real());
        CHECK(r[j * n + i].imag() == -r[i * n + j].imag());
      }
    }
  }
}

TEST_CASE("rank1 update matches naive outer product") {
  Rng rng(4);
  const std::size_t n = 9;
  std::vector<cplx> r(n * n, cplx(0, 0)), naive(n * n, cplx(0, 0));
  auto y = random_cvec(rng, n);
  const double beta = 0.9, alpha = 0.1;
  k::herm_rank1_update(r.data(), n, y.data(), beta, alpha);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < n; ++i)
      naive[j * n + i] = alpha * y[i] * std::conj(y[j]);
  for (std::size_t i = 0; i < n * n; ++i)
    CHECK(std::abs(r[i] - naive[i]) <= 1e-14 * std::max(1.0, std::abs(naive[i])));
}

TEST_CASE("rank1 rejects negative alpha") {
  std::vector<cplx> r(4, cplx(0, 0));
  std::vector<cplx> y = {cplx(1, 0), cplx(0, 1)};
  CHECK_THROWS_AS(k::herm_rank1_update(r.data(), 2, y.data(), 0.9, -0.1),
                  std::invalid_argument);
}
