#include "wasn/danse.hpp"

namespace wasn {

int danse_fused_width(const Scenario& s, int k, DanseFusedDim rule) {
  if (rule == DanseFusedDim::full) return s.params.num_speech;
  return static_cast<int>(s.obs.speech.row(k).sum());
}

DanseBatch::DanseBatch(const Scenario& s, const ScmSet& scms,
                       const DanseOptions& opts)
    : s_(s), scms_(scms), opts_(opts) {
  const int K = s.params.num_nodes;
  f_.resize(K);
  for (int k = 0; k < K; ++k) {
    const int m_k = s.params.sensors_per_node[k];
    const int qf = danse_fused_width(s, k, opts.fused_dim);
    if (qf > m_k)
      throw InfeasiblePattern("danse: fused width exceeds sensors at node " +
                              std::to_string(k));
    if (s.params.desired_channels > qf)
      throw InfeasiblePattern("danse: D exceeds fused width at node " +
                              std::to_string(k));
    // Seed F_k = [I; 0].
    f_[k] = CMatrix::Zero(m_k, qf);
    f_[k].topRows(qf).setIdentity();
  }
}

CMatrix DanseBatch::arrangement(int k) const {
  const int K = s_.params.num_nodes;
  const Eigen::Index m = s_.total_sensors();
  const Eigen::Index m_k = s_.params.sensors_per_node[k];
  Eigen::Index width = m_k;
  for (int q = 0; q < K; ++q)
    if (q != k) width += f_[q].cols();
  CMatrix d = CMatrix::Zero(m, width);
  d.block(s_.node_offset(k), 0, m_k, m_k).setIdentity();
  Eigen::Index col = m_k;
  for (int q = 0; q < K; ++q) {
    if (q == k) continue;
    d.block(s_.node_offset(q), col, f_[q].rows(), f_[q].cols()) = f_[q];
    col += f_[q].cols();
  }
  return d;
}

CMatrix DanseBatch::local_solve(int k, Eigen::Index cols) const {
  const CMatrix dk = arrangement(k);
  const CMatrix r_tyty = numerics::symmetrize(dk.adjoint() * scms_.ryy * dk);
  // Target: the speech contribution at node k's first `cols` sensors.
  const auto et = SelectionMatrix::contiguous(s_.total_sensors(), cols,
                                              s_.node_offset(k));
  const CMatrix r_td = dk.adjoint() * (scms_.rss * et.dense());
  return numerics::hermitian_solve(r_tyty, r_td, opts_.solve);
}

void DanseBatch::iterate() {
  const int K = s_.params.num_nodes;
  if (opts_.variant == DanseVariant::sequential) {
    const int u = iter_ % K;  // node (i mod K)+1, zero-based
    const CMatrix w = local_solve(u, f_[u].cols());
    f_[u] = w.topRows(f_[u].rows());
  } else {
    std::vector<CMatrix> next(K);
    for (int u = 0; u < K; ++u) {
      const CMatrix w = local_solve(u, f_[u].cols());
      next[u] = (1.0 - opts_.relaxation) * f_[u] +
                opts_.relaxation * w.topRows(f_[u].rows());
    }
    f_ = std::move(next);
  }
  ++iter_;
}

std::vector<CMatrix> DanseBatch::network_filters() const {
  const int K = s_.params.num_nodes;
  const int D = s_.params.desired_channels;
  std::vector<CMatrix> out(K);
  for (int k = 0; k < K; ++k) {
    const CMatrix wt = local_solve(k, f_[k].cols()).leftCols(D);
    CMatrix wk = CMatrix::Zero(s_.total_sensors(), D);
    const Eigen::Index m_k = s_.params.sensors_per_node[k];
    wk.middleRows(s_.node_offset(k), m_k) = wt.topRows(m_k);
    Eigen::Index row = m_k;
    for (int q = 0; q < K; ++q) {
      if (q == k) continue;
      wk.middleRows(s_.node_offset(q), f_[q].rows()) =
          f_[q] * wt.middleRows(row, f_[q].cols());
      row += f_[q].cols();
    }
    out[k] = wk;
  }
  return out;
}

}  // namespace wasn
