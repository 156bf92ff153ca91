#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "wasn/numerics.hpp"
#include "wasn/rng.hpp"

namespace wasn {

enum class ObservabilityMode { fods, pos };

struct ScenarioParams {
  int num_nodes = 6;                  // K
  std::vector<int> sensors_per_node;  // M_k, size K
  int num_speech = 2;                 // Qd
  int num_noise = 2;                  // Qn
  int desired_channels = 1;           // D
  double speech_power = 1.0;
  double noise_power = 1.0;
  double selfnoise_power = 0.01;
  ObservabilityMode mode = ObservabilityMode::fods;
  std::uint64_t seed = 0;

  int total_sensors() const;
  // Throws InfeasiblePattern / DimensionMismatch on inconsistent sizes.
  void validate() const;
};

// 0/1 node-by-source incidence, speech and noise kept separate.
struct ObservabilityPattern {
  Eigen::MatrixXi speech;  // K x Qd
  Eigen::MatrixXi noise;   // K x Qn

  int num_nodes() const { return static_cast<int>(speech.rows()); }
  int num_sources() const {
    return static_cast<int>(speech.cols() + noise.cols());
  }
  // Global source index: speech sources first, then noise.
  bool observes(int node, int source) const;
  // O_k as sorted global indices.
  std::vector<int> observed(int node) const;
  // O_kq = O_k intersect O_q.
  std::vector<int> shared(int k, int q) const;
};

struct Scenario {
  ScenarioParams params;
  ObservabilityPattern obs;
  // Per-node steering, zero columns for unobserved sources.
  std::vector<CMatrix> a_node;  // M_k x Qd
  std::vector<CMatrix> b_node;  // M_k x Qn
  // Network-wide stacks.
  CMatrix a;  // M x Qd
  CMatrix b;  // M x Qn

  int total_sensors() const { return static_cast<int>(a.rows()); }
  int node_offset(int k) const;
};

// Oracle second-order statistics of the model y = A s + B n + v.
struct ScmSet {
  CMatrix ryy;
  CMatrix rss;
  CMatrix rnnv;
};

// Rejection-samples a feasible pattern: Bernoulli(1/2) incidence subject to
// the mode and feasibility invariants.
ObservabilityPattern generate_observability(const ScenarioParams& p);

Scenario generate_scenario(const ScenarioParams& p);

// Same, but with a caller-supplied pattern (tests build edge cases directly).
Scenario scenario_from_pattern(const ScenarioParams& p,
                               const ObservabilityPattern& obs);

ScmSet oracle_scms(const Scenario& s);

// One oracle-domain observation frame: y = A s + B n + v with unit-variance
// complex Gaussian latents scaled by the configured powers. vad marks
// whether the speech latents were active in this frame.
struct Frame {
  std::vector<CVector> y;  // per node
  bool vad = true;
};

// ON-OFF duty pattern in frames; speech latents are zero during OFF.
struct DutyPattern {
  int frames_on = 8;
  int frames_off = 8;
  bool always_on = false;
  bool active(long frame) const;
};

Frame synthesize_frame(const Scenario& s, Rng& rng, bool speech_active);

// Text round trip (key = value lines; matrices as row-major value lists).
void save_scenario(const Scenario& s, std::ostream& out);
Scenario load_scenario(std::istream& in);

}  // namespace wasn
