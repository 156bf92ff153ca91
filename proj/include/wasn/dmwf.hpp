#pragma once

#include <map>

#include "wasn/filters.hpp"
#include "wasn/scenario.hpp"

namespace wasn {

// Dimensions of the fused signals. For node q, shared_sets[q] is
// C_q = union over k != q of O_qk (sorted global source indices),
// qbar[q] = |C_q|, and q_pair(k, q) = |O_kq| for k != q.
struct FusedDimensions {
  std::vector<std::vector<int>> shared_sets;
  std::vector<int> qbar;
  Eigen::MatrixXi q_pair;
};

FusedDimensions fused_dimensions(const ObservabilityPattern& obs);

enum class ProbePadding { zeros, ones, random };

// Probe sent from node k to node q during the discovery step:
// first `channels` sensor signals of y_k, extended to dim `fused_dim` by the
// padding transform. channels = Q_kq gives the reduced probe, channels =
// fused_dim the unreduced one.
struct ProbeSpec {
  int sender = 0;
  int receiver = 0;
  int channels = 0;
  int fused_dim = 0;
  ProbePadding padding = ProbePadding::ones;
  std::uint64_t seed = 0;

  // S_kq = [I; T] [I | 0], fused_dim x sender_sensors.
  CMatrix selector(int sender_sensors) const;
};

CVector build_probe(const CVector& y_k, const ProbeSpec& spec);

// Fusion matrix of node q. passthrough marks the M_q <= Qbar_q case where
// the node transmits its raw sensor signals (P = I).
struct FusionState {
  int node = 0;
  CMatrix p;
  bool passthrough = false;

  Eigen::Index fused_channels() const { return p.cols(); }
};

// z_q = P_q^H y_q.
CVector fuse(const FusionState& f, const CVector& y_q);

// Oracle discovery: P_q from closed-form SCMs. Throws RankDeficient when
// the probe cross-SCM R_{y_q r_q} contains an all-zero column (the
// zeros-padding failure mode).
FusionState discovery_oracle(const Scenario& s, const ScmSet& scms, int q,
                             const std::vector<ProbeSpec>& incoming,
                             const numerics::SolveOptions& opts = {});

// Tracked discovery from accumulated statistics (see netsim for the frame
// loop). Throws InsufficientData below the event floor M_q + Qbar_q.
FusionState discovery_from_stats(int q, const CMatrix& ryqyq,
                                 const CMatrix& ryqr, long events,
                                 long min_events, bool passthrough,
                                 const numerics::SolveOptions& opts = {});

// Layout of the observation vector at node k: local sensors first, then the
// fused blocks of the other nodes in ascending node order.
struct ObservationLayout {
  int node = 0;
  Eigen::Index local = 0;
  std::vector<std::pair<int, Eigen::Index>> fused;  // (node q, width)

  Eigen::Index total() const;
  Eigen::Index block_offset(int q) const;  // offset of node q's fused block
};

ObservationLayout observation_layout(int k, Eigen::Index m_k,
                                     const std::vector<FusionState>& fusion);

// ytilde_k = [y_k; z_q ...]; throws MissingBlock / DimensionMismatch when a
// fused signal is absent or mis-sized.
CVector build_observation(const ObservationLayout& layout, const CVector& y_k,
                          const std::map<int, CVector>& fused_signals);

// D_k: M x (M_k + sum Qbar_q), mapping network signals to the observation
// vector: identity on node k's block, P_q on the others.
CMatrix fusion_arrangement(const Scenario& s, int k,
                           const std::vector<FusionState>& fusion);

// Estimation filter of node k: W_tilde = R_ytyt^-1 R_ytd, partitioned into
// W_kk (local) and G_kq (per fused block).
struct EstimationFilter {
  ObservationLayout layout;
  CMatrix w;  // layout.total() x D

  CMatrix local() const;
  CMatrix gain(int q) const;
};

EstimationFilter estimation_filter(const ObservationLayout& layout,
                                   const CMatrix& r_ytyt, const CMatrix& r_ytd,
                                   const numerics::SolveOptions& opts = {});

// d_hat_k = W_kk^H y_k + sum_q G_kq^H z_q, evaluated as w^H ytilde.
CVector estimate_desired(const EstimationFilter& f, const CVector& ytilde);

// Network-wide equivalent W_k = [... P_q G_kq ... W_kk ...].
CMatrix network_wide_filter(const Scenario& s, int k,
                            const EstimationFilter& est,
                            const std::vector<FusionState>& fusion);

// Everything the oracle-SCM dMWF produces for one scenario.
struct DmwfOptions {
  bool reduced = false;  // channel-reduced probes (Q_kq) instead of Qbar_q
  ProbePadding padding = ProbePadding::ones;
  std::uint64_t padding_seed = 0;
  numerics::SolveOptions solve;
};

struct DmwfSolution {
  FusedDimensions dims;
  std::vector<FusionState> fusion;
  std::vector<EstimationFilter> est;
  std::vector<CMatrix> network;  // W_k, M x D each
};

DmwfSolution solve_dmwf_oracle(const Scenario& s, const ScmSet& scms,
                               const DmwfOptions& opts = {});

// The probe specs node q expects during discovery, one per sender, with
// deterministic padding seeds derived from opts.padding_seed.
std::vector<ProbeSpec> probe_plan(const Scenario& s,
                                  const FusedDimensions& dims, int q,
                                  const DmwfOptions& opts);

// Optimality diagnostics on one scenario: the matrix-inversion-lemma identity
// for Ryy^-1 and the column-space equality behind the discovery step.
struct OptimalityReport {
  double mil_relative_residual = 0;
  // Per node with Qbar_q > 0: least-squares residual of
  // R_{y_q r_q} = R_{y_q cy_q} X, smallest singular value of X, and the
  // largest principal angle between the two column spaces.
  std::vector<double> colspace_residual;
  std::vector<double> x_min_sv;
  std::vector<double> max_angle;
};

OptimalityReport optimality_diagnostics(const Scenario& s, const ScmSet& scms,
                                        const DmwfOptions& opts = {});

}  // namespace wasn
