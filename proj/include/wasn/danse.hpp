#pragma once

#include "wasn/dmwf.hpp"
#include "wasn/scenario.hpp"

namespace wasn {

enum class DanseVariant { sequential, simultaneous };

// Fused dimension rule: `full` broadcasts Qd channels per node, `observed`
// only as many speech sources as the node itself observes (Qd_k).
enum class DanseFusedDim { full, observed };

struct DanseOptions {
  DanseVariant variant = DanseVariant::sequential;
  DanseFusedDim fused_dim = DanseFusedDim::full;
  double relaxation = 0.5;  // simultaneous (rS) update mixing
  numerics::SolveOptions solve;
};

int danse_fused_width(const Scenario& s, int k, DanseFusedDim rule);

// Batch DANSE on oracle SCMs. Iterations are counted from 1; iteration i
// updates node (i-1) mod K in the sequential variant and every node in the
// simultaneous (rS) one.
class DanseBatch {
 public:
  DanseBatch(const Scenario& s, const ScmSet& scms, const DanseOptions& opts);

  void iterate();
  int iteration() const { return iter_; }

  const CMatrix& fusion(int k) const { return f_[k]; }

  // Network-wide equivalent filters at the current fusion state, one per
  // node, each M x D.
  std::vector<CMatrix> network_filters() const;

 private:
  // Observation-space solve at node k for `cols` target channels.
  CMatrix local_solve(int k, Eigen::Index cols) const;
  CMatrix arrangement(int k) const;

  const Scenario& s_;
  const ScmSet& scms_;
  DanseOptions opts_;
  std::vector<CMatrix> f_;  // F_k, M_k x Qf_k
  int iter_ = 0;
};

}  // namespace wasn
