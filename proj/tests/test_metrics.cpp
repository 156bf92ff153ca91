#include <doctest.h>

#include <cmath>
#include <limits>

#include "wasn/metrics.hpp"

using namespace wasn;

TEST_CASE("ser matches a hand computation on the trailing window") {
  const std::vector<double> d = {1.0, 2.0, 2.0, 1.0};
  const std::vector<double> e = {1.0, 2.0, 1.0, 0.0};
  // Window {2, 3}: signal 4 + 1, error 1 + 1.
  CHECK(ser_db(d, e, 4, 2) == doctest::Approx(10.0 * std::log10(5.0 / 2.0))
                                  .epsilon(1e-12));
  // Window {1, 2}: signal 8, error 1.
  CHECK(ser_db(d, e, 3, 2) ==
        doctest::Approx(10.0 * std::log10(8.0)).epsilon(1e-12));
}

TEST_CASE("ser handles its edge cases explicitly") {
  const std::vector<double> d = {0.0, 0.0, 1.0, 1.0};
  const std::vector<double> exact = d;
  CHECK(ser_db(d, exact, 4, 2) == std::numeric_limits<double>::infinity());

  const std::vector<double> e = {0.0, 0.0, 1.0, 0.5};
  // Window of zeros carries no signal energy.
  CHECK_THROWS_AS(ser_db(d, e, 2, 2), UndefinedMetric);
  // Fewer samples than the window.
  CHECK_THROWS_AS(ser_db(d, e, 1, 2), UndefinedMetric);
  CHECK_THROWS_AS(ser_db(d, e, 4, 0), UndefinedMetric);
  CHECK_THROWS_AS(ser_db(d, e, 5, 2), LengthMismatch);
  const std::vector<double> shorter = {0.0, 0.0, 1.0};
  CHECK_THROWS_AS(ser_db(d, shorter, 3, 2), LengthMismatch);
  CHECK_THROWS_AS(ser_db(std::vector<double>{}, std::vector<double>{}, 0, 1),
                  EmptyTrace);
}

TEST_CASE("ser grows as the error shrinks") {
  std::vector<double> d(100, 1.0);
  std::vector<double> e1(100), e2(100);
  for (size_t i = 0; i < 100; ++i) {
    e1[i] = 1.0 + 0.1;
    e2[i] = 1.0 + 0.01;
  }
  CHECK(ser_db(d, e2, 100, 50) > ser_db(d, e1, 100, 50));
  CHECK(ser_db(d, e1, 100, 50) == doctest::Approx(20.0).epsilon(1e-12));
}

TEST_CASE("filter mse averages squared distances across nodes") {
  CMatrix a(1, 1), b(1, 1), ra(1, 1), rb(1, 1);
  a << cplx(1, 0);
  ra << cplx(0, 0);
  b << cplx(0, 0);
  rb << cplx(0, 2);
  const double v = mse_w({a, b}, {ra, rb});
  CHECK(v == doctest::Approx((1.0 + 4.0) / 2.0).epsilon(1e-15));
}

TEST_CASE("filter mse validates its inputs") {
  CMatrix a = CMatrix::Identity(2, 1);
  CHECK_THROWS_AS(mse_w({}, {}), EmptyTrace);
  CHECK_THROWS_AS(mse_w({a}, {a, a}), LengthMismatch);
  CHECK_THROWS_AS(mse_w({a}, {CMatrix::Identity(3, 1)}), DimensionMismatch);
  CHECK(mse_w({a}, {a}) == 0.0);
}
