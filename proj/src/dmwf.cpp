#include "wasn/dmwf.hpp"

#include <algorithm>

#include "wasn/kernels.hpp"

namespace wasn {

FusedDimensions fused_dimensions(const ObservabilityPattern& obs) {
  const int K = obs.num_nodes();
  const int Q = obs.num_sources();
  FusedDimensions d;
  d.shared_sets.resize(K);
  d.qbar.resize(K);
  d.q_pair = Eigen::MatrixXi::Zero(K, K);
  for (int q = 0; q < K; ++q) {
    std::vector<bool> in_set(Q, false);
    for (int k = 0; k < K; ++k) {
      if (k == q) continue;
      int count = 0;
      for (int j = 0; j < Q; ++j) {
        if (obs.observes(q, j) && obs.observes(k, j)) {
          in_set[j] = true;
          ++count;
        }
      }
      d.q_pair(k, q) = count;
    }
    for (int j = 0; j < Q; ++j)
      if (in_set[j]) d.shared_sets[q].push_back(j);
    d.qbar[q] = static_cast<int>(d.shared_sets[q].size());
  }
  return d;
}

CMatrix ProbeSpec::selector(int sender_sensors) const {
  if (fused_dim < 0 || channels < 0)
    throw DimensionMismatch("probe spec: negative dimension");
  // More channels than sensors cannot be sent; truncate to M_k and let the
  // padding transform cover the rest.
  const int qk = std::min(channels, sender_sensors);
  CMatrix s = CMatrix::Zero(fused_dim, sender_sensors);
  const int ident = std::min<int>(qk, fused_dim);
  for (int i = 0; i < ident; ++i) s(i, i) = 1.0;
  if (fused_dim > qk) {
    switch (padding) {
      case ProbePadding::zeros:
        break;
      case ProbePadding::ones:
        s.block(qk, 0, fused_dim - qk, qk).setOnes();
        break;
      case ProbePadding::random: {
        Rng rng(seed);
        for (int i = qk; i < fused_dim; ++i)
          for (int j = 0; j < qk; ++j) s(i, j) = rng.cnormal();
        break;
      }
    }
  }
  return s;
}

CVector build_probe(const CVector& y_k, const ProbeSpec& spec) {
  return spec.selector(static_cast<int>(y_k.size())) * y_k;
}

CVector fuse(const FusionState& f, const CVector& y_q) {
  if (y_q.size() != f.p.rows())
    throw DimensionMismatch("fuse: sensor dim mismatch");
  const auto n = static_cast<std::size_t>(y_q.size());
  CVector z(f.p.cols());
  for (Eigen::Index j = 0; j < f.p.cols(); ++j)
    z(j) = kernels::cdot_conj(f.p.col(j).data(), y_q.data(), n);
  return z;
}

namespace {

void check_no_zero_columns(const CMatrix& ryqr, int q) {
  for (Eigen::Index j = 0; j < ryqr.cols(); ++j) {
    if (ryqr.col(j).norm() == 0.0)
      throw RankDeficient("discovery: all-zero probe column at node " +
                          std::to_string(q) +
                          " (zeros padding beyond max Q_kq)");
  }
}

FusionState passthrough_state(int q, Eigen::Index m_q) {
  FusionState f;
  f.node = q;
  f.p = CMatrix::Identity(m_q, m_q);
  f.passthrough = true;
  return f;
}

}  // namespace

FusionState discovery_oracle(const Scenario& s, const ScmSet& scms, int q,
                             const std::vector<ProbeSpec>& incoming,
                             const numerics::SolveOptions& opts) {
  const int m_q = s.params.sensors_per_node[q];
  const int off_q = s.node_offset(q);

  int fused_dim = -1;
  for (const auto& spec : incoming) {
    if (spec.receiver != q)
      throw DimensionMismatch("discovery_oracle: probe for another node");
    if (fused_dim == -1)
      fused_dim = spec.fused_dim;
    else if (fused_dim != spec.fused_dim)
      throw DimensionMismatch("discovery_oracle: inconsistent probe dims");
  }
  if (fused_dim < 0) fused_dim = 0;

  if (fused_dim == 0) {
    FusionState f;
    f.node = q;
    f.p = CMatrix(m_q, 0);
    return f;
  }
  if (m_q <= fused_dim) return passthrough_state(q, m_q);

  CMatrix ryqr = CMatrix::Zero(m_q, fused_dim);
  for (const auto& spec : incoming) {
    const int m_k = s.params.sensors_per_node[spec.sender];
    const int off_k = s.node_offset(spec.sender);
    ryqr += scms.ryy.block(off_q, off_k, m_q, m_k) *
            spec.selector(m_k).adjoint();
  }
  check_no_zero_columns(ryqr, q);

  FusionState f;
  f.node = q;
  f.p = numerics::hermitian_solve(scms.ryy.block(off_q, off_q, m_q, m_q),
                                  ryqr, opts);
  return f;
}

FusionState discovery_from_stats(int q, const CMatrix& ryqyq,
                                 const CMatrix& ryqr, long events,
                                 long min_events, bool passthrough,
                                 const numerics::SolveOptions& opts) {
  if (passthrough) return passthrough_state(q, ryqyq.rows());
  if (events < min_events)
    throw InsufficientData("discovery: node " + std::to_string(q) + " has " +
                           std::to_string(events) + " probe events, needs " +
                           std::to_string(min_events));
  if (ryqyq.rows() != ryqr.rows())
    throw DimensionMismatch("discovery: stat shape mismatch");
  check_no_zero_columns(ryqr, q);
  FusionState f;
  f.node = q;
  f.p = numerics::hermitian_solve(ryqyq, ryqr, opts);
  return f;
}

Eigen::Index ObservationLayout::total() const {
  Eigen::Index t = local;
  for (const auto& [q, w] : fused) t += w;
  return t;
}

Eigen::Index ObservationLayout::block_offset(int q) const {
  Eigen::Index off = local;
  for (const auto& [node, w] : fused) {
    if (node == q) return off;
    off += w;
  }
  throw MissingBlock("observation layout: no fused block for node " +
                     std::to_string(q));
}

ObservationLayout observation_layout(int k, Eigen::Index m_k,
                                     const std::vector<FusionState>& fusion) {
  ObservationLayout lay;
  lay.node = k;
  lay.local = m_k;
  for (const auto& f : fusion) {
    if (f.node == k) continue;
    lay.fused.emplace_back(f.node, f.fused_channels());
  }
  std::sort(lay.fused.begin(), lay.fused.end());
  return lay;
}

CVector build_observation(const ObservationLayout& layout, const CVector& y_k,
                          const std::map<int, CVector>& fused_signals) {
  if (y_k.size() != layout.local)
    throw DimensionMismatch("build_observation: local dim mismatch");
  CVector yt(layout.total());
  yt.head(layout.local) = y_k;
  Eigen::Index off = layout.local;
  for (const auto& [q, w] : layout.fused) {
    const auto it = fused_signals.find(q);
    if (it == fused_signals.end())
      throw MissingBlock("build_observation: no fused signal from node " +
                         std::to_string(q));
    if (it->second.size() != w)
      throw DimensionMismatch("build_observation: fused dim mismatch at node " +
                              std::to_string(q));
    yt.segment(off, w) = it->second;
    off += w;
  }
  return yt;
}

CMatrix fusion_arrangement(const Scenario& s, int k,
                           const std::vector<FusionState>& fusion) {
  const int K = s.params.num_nodes;
  if (static_cast<int>(fusion.size()) != K)
    throw DimensionMismatch("fusion_arrangement: need one state per node");
  const Eigen::Index m = s.total_sensors();
  const Eigen::Index m_k = s.params.sensors_per_node[k];
  Eigen::Index width = m_k;
  for (int q = 0; q < K; ++q)
    if (q != k) width += fusion[q].fused_channels();

  CMatrix d = CMatrix::Zero(m, width);
  d.block(s.node_offset(k), 0, m_k, m_k).setIdentity();
  Eigen::Index col = m_k;
  for (int q = 0; q < K; ++q) {
    if (q == k) continue;
    const auto w = fusion[q].fused_channels();
    d.block(s.node_offset(q), col, fusion[q].p.rows(), w) = fusion[q].p;
    col += w;
  }
  return d;
}

EstimationFilter estimation_filter(const ObservationLayout& layout,
                                   const CMatrix& r_ytyt, const CMatrix& r_ytd,
                                   const numerics::SolveOptions& opts) {
  if (r_ytyt.rows() != layout.total())
    throw DimensionMismatch("estimation_filter: SCM dim != layout dim");
  if (r_ytd.rows() != layout.total())
    throw DimensionMismatch("estimation_filter: cross-SCM dim mismatch");
  EstimationFilter f;
  f.layout = layout;
  f.w = numerics::hermitian_solve(r_ytyt, r_ytd, opts);
  return f;
}

CMatrix EstimationFilter::local() const { return w.topRows(layout.local); }

CMatrix EstimationFilter::gain(int q) const {
  Eigen::Index off = layout.local;
  for (const auto& [node, width] : layout.fused) {
    if (node == q) return w.middleRows(off, width);
    off += width;
  }
  throw MissingBlock("estimation filter: no gain block for node " +
                     std::to_string(q));
}

CVector estimate_desired(const EstimationFilter& f, const CVector& ytilde) {
  if (ytilde.size() != f.layout.total())
    throw DimensionMismatch("estimate_desired: observation dim mismatch");
  const auto n = static_cast<std::size_t>(ytilde.size());
  CVector d(f.w.cols());
  for (Eigen::Index j = 0; j < f.w.cols(); ++j)
    d(j) = kernels::cdot_conj(f.w.col(j).data(), ytilde.data(), n);
  return d;
}

CMatrix network_wide_filter(const Scenario& s, int k,
                            const EstimationFilter& est,
                            const std::vector<FusionState>& fusion) {
  const Eigen::Index m = s.total_sensors();
  CMatrix wk = CMatrix::Zero(m, est.w.cols());
  wk.middleRows(s.node_offset(k), est.layout.local) = est.local();
  for (const auto& f : fusion) {
    if (f.node == k) continue;
    if (f.fused_channels() == 0) continue;
    wk.middleRows(s.node_offset(f.node), f.p.rows()) = f.p * est.gain(f.node);
  }
  return wk;
}

std::vector<ProbeSpec> probe_plan(const Scenario& s,
                                  const FusedDimensions& dims, int q,
                                  const DmwfOptions& opts) {
  std::vector<ProbeSpec> specs;
  const int K = s.params.num_nodes;
  for (int k = 0; k < K; ++k) {
    if (k == q) continue;
    ProbeSpec spec;
    spec.sender = k;
    spec.receiver = q;
    spec.fused_dim = dims.qbar[q];
    spec.channels = opts.reduced ? dims.q_pair(k, q) : dims.qbar[q];
    spec.padding = opts.padding;
    spec.seed = Rng::derive(opts.padding_seed,
                            static_cast<std::uint64_t>(k) * 1000 + q);
    specs.push_back(spec);
  }
  return specs;
}

DmwfSolution solve_dmwf_oracle(const Scenario& s, const ScmSet& scms,
                               const DmwfOptions& opts) {
  const int K = s.params.num_nodes;
  const int D = s.params.desired_channels;
  DmwfSolution sol;
  sol.dims = fused_dimensions(s.obs);

  sol.fusion.reserve(K);
  for (int q = 0; q < K; ++q) {
    sol.fusion.push_back(discovery_oracle(
        s, scms, q, probe_plan(s, sol.dims, q, opts), opts.solve));
  }

  sol.est.reserve(K);
  sol.network.reserve(K);
  for (int k = 0; k < K; ++k) {
    const CMatrix dk = fusion_arrangement(s, k, sol.fusion);
    const CMatrix r_ytyt = numerics::symmetrize(dk.adjoint() * scms.ryy * dk);
    const auto ek = SelectionMatrix::contiguous(s.total_sensors(), D,
                                                s.node_offset(k));
    const CMatrix r_ytd = dk.adjoint() * (scms.rss * ek.dense());
    auto layout = observation_layout(k, s.params.sensors_per_node[k],
                                     sol.fusion);
    sol.est.push_back(estimation_filter(layout, r_ytyt, r_ytd, opts.solve));
    sol.network.push_back(network_wide_filter(s, k, sol.est.back(), sol.fusion));
  }
  return sol;
}

OptimalityReport optimality_diagnostics(const Scenario& s, const ScmSet& scms,
                                    const DmwfOptions& opts) {
  const int K = s.params.num_nodes;
  const int Q = s.params.num_speech + s.params.num_noise;
  const Eigen::Index m = s.total_sensors();
  const auto dims = fused_dimensions(s.obs);

  // Source powers, speech first then noise.
  RVector powers(Q);
  for (int j = 0; j < Q; ++j)
    powers(j) = j < s.params.num_speech ? s.params.speech_power
                                        : s.params.noise_power;

  // Per node: split the steering into shared columns (sources in C_q) and
  // unshared ones; u_q = unshared contributions + self noise.
  CMatrix cbar = CMatrix::Zero(m, Q);           // shared parts, stacked
  CMatrix gamma = CMatrix::Zero(m, m);          // blockdiag R_u,q^-1
  std::vector<CMatrix> gamma_q(K), cbreve(K);
  for (int q = 0; q < K; ++q) {
    const int m_q = s.params.sensors_per_node[q];
    const int off = s.node_offset(q);
    CMatrix full(m_q, Q);
    full << s.a_node[q], s.b_node[q];
    std::vector<bool> in_c(Q, false);
    for (int j : dims.shared_sets[q]) in_c[j] = true;
    CMatrix shared = CMatrix::Zero(m_q, Q);
    CMatrix unshared = CMatrix::Zero(m_q, Q);
    for (int j = 0; j < Q; ++j)
      (in_c[j] ? shared : unshared).col(j) = full.col(j);
    cbar.middleRows(off, m_q) = shared;
    CMatrix ru = unshared * powers.asDiagonal() * unshared.adjoint() +
                 s.params.selfnoise_power * CMatrix::Identity(m_q, m_q);
    gamma_q[q] = numerics::hermitian_solve(ru, CMatrix::Identity(m_q, m_q),
                                           opts.solve);
    gamma.block(off, off, m_q, m_q) = gamma_q[q];
    // Shared columns compacted to the C_q set for the column-space check.
    cbreve[q] = CMatrix(m_q, dims.qbar[q]);
    for (int c = 0; c < dims.qbar[q]; ++c)
      cbreve[q].col(c) = full.col(dims.shared_sets[q][c]);
  }

  OptimalityReport rep;
  // Ryy^-1 = Gamma - Gamma Cbar X^-1 Cbar^H Gamma,
  // X = Rx^-1 + Cbar^H Gamma Cbar.
  CMatrix rx_inv = CMatrix::Zero(Q, Q);
  for (int j = 0; j < Q; ++j) rx_inv(j, j) = 1.0 / powers(j);
  CMatrix x = rx_inv + cbar.adjoint() * gamma * cbar;
  CMatrix gc = gamma * cbar;
  CMatrix ryy_inv =
      gamma - gc * numerics::hermitian_solve(x, CMatrix(gc.adjoint()),
                                             opts.solve);
  rep.mil_relative_residual =
      (ryy_inv * scms.ryy - CMatrix::Identity(m, m)).norm() /
      std::sqrt(static_cast<double>(m));

  // Column-space equality (unreduced probes): R_{y_q r_q} = R_{y_q cy_q} X_q
  // for some full-rank X_q, where R_{y_q cy_q} keeps the first Qbar_q
  // columns of E[y_q cy_q^H].
  for (int q = 0; q < K; ++q) {
    if (dims.qbar[q] == 0) continue;
    auto unreduced = opts;
    unreduced.reduced = false;
    const auto specs = probe_plan(s, dims, q, unreduced);
    const int m_q = s.params.sensors_per_node[q];
    const int off_q = s.node_offset(q);
    CMatrix ryqr = CMatrix::Zero(m_q, dims.qbar[q]);
    for (const auto& spec : specs) {
      const int m_k = s.params.sensors_per_node[spec.sender];
      ryqr += scms.ryy.block(off_q, s.node_offset(spec.sender), m_q, m_k) *
              spec.selector(m_k).adjoint();
    }
    RVector pbreve(dims.qbar[q]);
    for (int c = 0; c < dims.qbar[q]; ++c)
      pbreve(c) = powers(dims.shared_sets[q][c]);
    CMatrix rycy_full = cbreve[q] * pbreve.asDiagonal() * cbreve[q].adjoint();
    CMatrix rycy = rycy_full.leftCols(dims.qbar[q]);

    CMatrix xq = rycy.colPivHouseholderQr().solve(ryqr);
    rep.colspace_residual.push_back((rycy * xq - ryqr).norm() /
                                    std::max(ryqr.norm(), 1e-300));
    Eigen::JacobiSVD<CMatrix> svd(xq);
    rep.x_min_sv.push_back(svd.singularValues().minCoeff());
    rep.max_angle.push_back(numerics::max_principal_angle(ryqr, rycy));
  }
  return rep;
}

}  // namespace wasn
