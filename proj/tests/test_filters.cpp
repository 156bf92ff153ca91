#include <doctest.h>

#include "wasn/filters.hpp"
#include "wasn/scenario.hpp"

using namespace wasn;

namespace {

numerics::SolveOptions exact() {
  numerics::SolveOptions o;
  o.diagonal_loading = false;
  return o;
}

CMatrix random_cmatrix(Rng& rng, Eigen::Index r, Eigen::Index c) {
  CMatrix m(r, c);
  for (Eigen::Index j = 0; j < c; ++j)
    for (Eigen::Index i = 0; i < r; ++i) m(i, j) = rng.cnormal();
  return m;
}

ScmSet test_scms(std::uint64_t seed, ObservabilityMode mode = ObservabilityMode::fods) {
  ScenarioParams p;
  p.num_nodes = 2;
  p.sensors_per_node = {3, 3};
  p.num_speech = 2;
  p.num_noise = 2;
  p.mode = mode;
  p.seed = seed;
  return oracle_scms(generate_scenario(p));
}

}  // namespace

TEST_CASE("selection matrix picks identity columns") {
  const auto e = SelectionMatrix::contiguous(5, 2, 1);
  const CMatrix d = e.dense();
  REQUIRE(d.rows() == 5);
  REQUIRE(d.cols() == 2);
  CHECK(d(1, 0) == cplx(1, 0));
  CHECK(d(2, 1) == cplx(1, 0));
  CHECK(d.cwiseAbs().sum() == 2.0);

  Rng rng(41);
  const CMatrix m = random_cmatrix(rng, 5, 4);
  CHECK((e.select_rows(m) - d.adjoint() * m).norm() == 0.0);

  CHECK_THROWS_AS(SelectionMatrix::contiguous(5, 3, 3), DimensionMismatch);
  CHECK_THROWS_AS(e.select_rows(random_cmatrix(rng, 4, 2)),
                  DimensionMismatch);
}

TEST_CASE("centralized mwf satisfies the normal equations") {
  const ScmSet scms = test_scms(51);
  const auto ek = SelectionMatrix::contiguous(scms.ryy.rows(), 1, 0);
  const CMatrix w = centralized_mwf(scms.ryy, scms.rss, ek, exact());
  const CMatrix ryd = scms.rss * ek.dense();
  CHECK((scms.ryy * w - ryd).norm() <= 1e-10 * ryd.norm());
}

TEST_CASE("centralized mwf minimizes the estimation error") {
  // MSE(W) = E|d - W^H y|^2 = tr(E^H Rss E) - 2 Re tr(W^H Ryd) +
  // tr(W^H Ryy W); any perturbation of the solution must not improve it.
  const ScmSet scms = test_scms(52);
  const auto ek = SelectionMatrix::contiguous(scms.ryy.rows(), 1, 3);
  const CMatrix ryd = scms.rss * ek.dense();
  const CMatrix rdd = ek.dense().adjoint() * scms.rss * ek.dense();
  const auto mse = [&](const CMatrix& w) {
    return std::real(rdd.trace()) - 2.0 * std::real((w.adjoint() * ryd).trace()) +
           std::real((w.adjoint() * scms.ryy * w).trace());
  };
  const CMatrix w = centralized_mwf(scms.ryy, scms.rss, ek, exact());
  Rng rng(53);
  const double base = mse(w);
  for (int t = 0; t < 20; ++t) {
    const CMatrix dw = 0.1 * random_cmatrix(rng, w.rows(), w.cols());
    CHECK(mse(w + dw) >= base - 1e-12 * std::abs(base));
  }
}

TEST_CASE("centralized mwf rejects mismatched shapes") {
  const ScmSet scms = test_scms(54);
  const auto bad = SelectionMatrix::contiguous(4, 1, 0);
  CHECK_THROWS_AS(centralized_mwf(scms.ryy, scms.rss, bad), DimensionMismatch);
  CHECK_THROWS_AS(
      centralized_mwf(scms.ryy, CMatrix::Identity(3, 3),
                      SelectionMatrix::contiguous(scms.ryy.rows(), 1, 0)),
      DimensionMismatch);
}

TEST_CASE("rank-Qd gevd variant equals the plain mwf on exact-rank speech") {
  // Rss = speech_power A A^H has exact rank Qd, so truncating the
  // generalized spectrum at Qd loses nothing.
  for (std::uint64_t seed : {61, 62, 63}) {
    const ScmSet scms = test_scms(seed);
    const auto ek = SelectionMatrix::contiguous(scms.ryy.rows(), 1, 0);
    const CMatrix w_mwf = centralized_mwf(scms.ryy, scms.rss, ek, exact());
    const CMatrix w_gevd = gevd_mwf(scms.ryy, scms.rnnv, 2, ek, exact());
    CHECK((w_gevd - w_mwf).norm() <= 1e-9 * w_mwf.norm());
  }
}

TEST_CASE("gevd gain clamp zeroes directions without speech excess") {
  // Ryy = 0.5 Rnnv makes every generalized eigenvalue 0.5 < 1, so all
  // gains clamp to zero.
  const ScmSet scms = test_scms(64);
  const auto ek = SelectionMatrix::contiguous(scms.ryy.rows(), 1, 0);
  const CMatrix half = 0.5 * scms.rnnv;
  const CMatrix w = gevd_mwf(half, scms.rnnv, 3, ek, exact());
  CHECK(w.norm() <= 1e-12);
}

TEST_CASE("gevd variant validates rank and shapes") {
  const ScmSet scms = test_scms(65);
  const auto ek = SelectionMatrix::contiguous(scms.ryy.rows(), 1, 0);
  CHECK_THROWS_AS(gevd_mwf(scms.ryy, scms.rnnv, -1, ek), DimensionMismatch);
  CHECK_THROWS_AS(gevd_mwf(scms.ryy, scms.rnnv, 7, ek), DimensionMismatch);
  CHECK_THROWS_AS(gevd_mwf(scms.ryy, CMatrix::Identity(3, 3), 1, ek),
                  DimensionMismatch);
  // Rank 0 yields the zero filter.
  CHECK(gevd_mwf(scms.ryy, scms.rnnv, 0, ek, exact()).norm() == 0.0);
}
