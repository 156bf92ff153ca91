#include <doctest.h>

#include "wasn/danse.hpp"
#include "wasn/metrics.hpp"

using namespace wasn;

namespace {

numerics::SolveOptions exact() {
  numerics::SolveOptions o;
  o.diagonal_loading = false;
  return o;
}

ScenarioParams small_params(ObservabilityMode mode, std::uint64_t seed) {
  ScenarioParams p;
  p.num_nodes = 3;
  p.sensors_per_node = {3, 3, 3};
  p.num_speech = 2;
  p.num_noise = 2;
  p.desired_channels = 1;
  p.mode = mode;
  p.seed = seed;
  return p;
}

std::vector<CMatrix> centralized_references(const Scenario& s,
                                            const ScmSet& scms) {
  std::vector<CMatrix> w;
  for (int k = 0; k < s.params.num_nodes; ++k) {
    const auto ek = SelectionMatrix::contiguous(
        s.total_sensors(), s.params.desired_channels, s.node_offset(k));
    w.push_back(centralized_mwf(scms.ryy, scms.rss, ek, exact()));
  }
  return w;
}

}  // namespace

TEST_CASE("fused width follows the dimension rule") {
  const Scenario s = generate_scenario(small_params(ObservabilityMode::pos, 5));
  for (int k = 0; k < 3; ++k) {
    CHECK(danse_fused_width(s, k, DanseFusedDim::full) == 2);
    CHECK(danse_fused_width(s, k, DanseFusedDim::observed) ==
          s.obs.speech.row(k).sum());
  }
}

TEST_CASE("construction rejects infeasible fused widths") {
  ScenarioParams p = small_params(ObservabilityMode::fods, 6);
  p.sensors_per_node = {1, 3, 3};
  ObservabilityPattern obs;
  obs.speech = Eigen::MatrixXi::Ones(3, 2);
  obs.noise = Eigen::MatrixXi::Zero(3, 2);
  obs.noise(1, 0) = obs.noise(2, 1) = 1;
  const Scenario s = scenario_from_pattern(p, obs);
  const ScmSet scms = oracle_scms(s);
  DanseOptions opts;
  // Node 0 would broadcast Qd = 2 channels from a single sensor.
  CHECK_THROWS_AS(DanseBatch(s, scms, opts), InfeasiblePattern);
}

TEST_CASE("sequential updates visit nodes round robin") {
  const Scenario s = generate_scenario(small_params(ObservabilityMode::fods, 7));
  const ScmSet scms = oracle_scms(s);
  DanseOptions opts;
  DanseBatch danse(s, scms, opts);
  CHECK(danse.iteration() == 0);

  CMatrix seed0 = danse.fusion(0), seed1 = danse.fusion(1),
          seed2 = danse.fusion(2);
  // F_k starts at [I; 0].
  CHECK((seed0.topRows(2) - CMatrix::Identity(2, 2)).norm() == 0.0);
  CHECK(seed0.bottomRows(1).norm() == 0.0);

  danse.iterate();
  CHECK(danse.iteration() == 1);
  CHECK((danse.fusion(0) - seed0).norm() > 0.0);
  CHECK((danse.fusion(1) - seed1).norm() == 0.0);
  CHECK((danse.fusion(2) - seed2).norm() == 0.0);

  danse.iterate();
  CHECK((danse.fusion(1) - seed1).norm() > 0.0);
  CHECK((danse.fusion(2) - seed2).norm() == 0.0);

  danse.iterate();
  CHECK((danse.fusion(2) - seed2).norm() > 0.0);
}

TEST_CASE("simultaneous updates relax every node at once") {
  const Scenario s = generate_scenario(small_params(ObservabilityMode::fods, 8));
  const ScmSet scms = oracle_scms(s);
  DanseOptions opts;
  opts.variant = DanseVariant::simultaneous;

  DanseBatch danse(s, scms, opts);
  const CMatrix seed0 = danse.fusion(0);
  danse.iterate();
  for (int k = 0; k < 3; ++k) CHECK(danse.fusion(k).topRows(2).norm() > 0.0);
  CHECK((danse.fusion(0) - seed0).norm() > 0.0);

  // Zero relaxation freezes the fusion state.
  opts.relaxation = 0.0;
  DanseBatch frozen(s, scms, opts);
  frozen.iterate();
  CHECK((frozen.fusion(0) - seed0).norm() == 0.0);
}

TEST_CASE("network filters have network dimensions") {
  const Scenario s = generate_scenario(small_params(ObservabilityMode::fods, 9));
  const ScmSet scms = oracle_scms(s);
  DanseBatch danse(s, scms, DanseOptions{});
  const auto w = danse.network_filters();
  REQUIRE(w.size() == 3);
  for (const auto& wk : w) {
    CHECK(wk.rows() == s.total_sensors());
    CHECK(wk.cols() == 1);
  }
}

TEST_CASE("fully overlapping scenarios drive the distance to optimum down") {
  const Scenario s = generate_scenario(small_params(ObservabilityMode::fods, 10));
  const ScmSet scms = oracle_scms(s);
  const auto refs = centralized_references(s, scms);

  for (DanseVariant variant :
       {DanseVariant::sequential, DanseVariant::simultaneous}) {
    DanseOptions opts;
    opts.variant = variant;
    DanseBatch danse(s, scms, opts);
    danse.iterate();
    const double mse1 = mse_w(danse.network_filters(), refs);
    for (int i = 1; i < 30; ++i) danse.iterate();
    const double mse30 = mse_w(danse.network_filters(), refs);
    CHECK(mse30 <= 1e-2 * mse1);
  }
}

TEST_CASE("partial overlap leaves a plateau the optimal filters do not have") {
  // Under the per-node fused-width rule the broadcast channels cannot span
  // the full shared-source space, so the iteration stalls above optimum.
  ScenarioParams p = small_params(ObservabilityMode::pos, 11);
  p.sensors_per_node = {4, 4, 4};
  const Scenario s = generate_scenario(p);
  const ScmSet scms = oracle_scms(s);
  const auto refs = centralized_references(s, scms);

  DanseOptions opts;
  opts.fused_dim = DanseFusedDim::observed;
  DanseBatch danse(s, scms, opts);
  for (int i = 0; i < 30; ++i) danse.iterate();
  const double plateau = mse_w(danse.network_filters(), refs);

  DmwfOptions dopts;
  dopts.solve = exact();
  const DmwfSolution sol = solve_dmwf_oracle(s, scms, dopts);
  const double exact_err = mse_w(sol.network, refs);
  CHECK(plateau >= 1e3 * exact_err);
}
