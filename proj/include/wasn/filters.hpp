#pragma once

#include "wasn/numerics.hpp"

namespace wasn {

// Columns of an identity matrix: E = I(:, idx), total x |idx|.
struct SelectionMatrix {
  Eigen::Index total = 0;
  std::vector<Eigen::Index> idx;

  static SelectionMatrix contiguous(Eigen::Index total, Eigen::Index count,
                                    Eigen::Index offset);
  CMatrix dense() const;
  // E^H m == m(idx, :) without materializing E.
  CMatrix select_rows(const CMatrix& m) const;
};

// Centralized multichannel Wiener filter W = Ryy^-1 Ryd with the
// uncorrelated-sources identity Ryd = Rss E_k.
CMatrix centralized_mwf(const CMatrix& ryy, const CMatrix& rss,
                        const SelectionMatrix& ek,
                        const numerics::SolveOptions& opts = {});

// Rank-constrained variant built from gevd(Ryy, Rnnv) = (lambda, X):
// W = X diag(g) X^-1 E_k with g_i = max(1 - 1/lambda_i, 0) for i < rank and
// 0 beyond. Equals the plain MWF when Rss = Ryy - Rnnv has exact rank
// `rank` and the leading eigenvalues exceed 1.
CMatrix gevd_mwf(const CMatrix& ryy, const CMatrix& rnnv, Eigen::Index rank,
                 const SelectionMatrix& ek,
                 const numerics::SolveOptions& opts = {});

}  // namespace wasn
