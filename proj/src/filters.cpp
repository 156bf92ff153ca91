#include "wasn/filters.hpp"

#include <algorithm>

namespace wasn {

SelectionMatrix SelectionMatrix::contiguous(Eigen::Index total,
                                            Eigen::Index count,
                                            Eigen::Index offset) {
  if (count < 0 || offset < 0 || offset + count > total)
    throw DimensionMismatch("selection matrix: block out of range");
  SelectionMatrix e;
  e.total = total;
  e.idx.resize(static_cast<size_t>(count));
  for (Eigen::Index i = 0; i < count; ++i) e.idx[static_cast<size_t>(i)] = offset + i;
  return e;
}

CMatrix SelectionMatrix::dense() const {
  CMatrix e = CMatrix::Zero(total, static_cast<Eigen::Index>(idx.size()));
  for (size_t j = 0; j < idx.size(); ++j) {
    if (idx[j] < 0 || idx[j] >= total)
      throw DimensionMismatch("selection matrix: index out of range");
    e(idx[j], static_cast<Eigen::Index>(j)) = 1.0;
  }
  return e;
}

CMatrix SelectionMatrix::select_rows(const CMatrix& m) const {
  if (m.rows() != total)
    throw DimensionMismatch("selection matrix: operand rows != total");
  CMatrix out(static_cast<Eigen::Index>(idx.size()), m.cols());
  for (size_t j = 0; j < idx.size(); ++j)
    out.row(static_cast<Eigen::Index>(j)) = m.row(idx[j]);
  return out;
}

CMatrix centralized_mwf(const CMatrix& ryy, const CMatrix& rss,
                        const SelectionMatrix& ek,
                        const numerics::SolveOptions& opts) {
  if (ryy.rows() != rss.rows() || ryy.cols() != rss.cols())
    throw DimensionMismatch("centralized_mwf: SCM shape mismatch");
  if (ek.total != ryy.rows())
    throw DimensionMismatch("centralized_mwf: selection dim mismatch");
  // Ryd = Rss E_k: E_k picks columns of Rss.
  CMatrix ryd = rss * ek.dense();
  return numerics::hermitian_solve(ryy, ryd, opts);
}

CMatrix gevd_mwf(const CMatrix& ryy, const CMatrix& rnnv, Eigen::Index rank,
                 const SelectionMatrix& ek,
                 const numerics::SolveOptions& opts) {
  if (ryy.rows() != rnnv.rows())
    throw DimensionMismatch("gevd_mwf: SCM shape mismatch");
  if (ek.total != ryy.rows())
    throw DimensionMismatch("gevd_mwf: selection dim mismatch");
  if (rank < 0 || rank > ryy.rows())
    throw DimensionMismatch("gevd_mwf: rank out of range");
  const auto g = numerics::gevd(ryy, rnnv, opts);
  const Eigen::Index n = ryy.rows();
  RVector gains = RVector::Zero(n);
  for (Eigen::Index i = 0; i < rank; ++i)
    gains(i) = std::max(1.0 - 1.0 / g.eigenvalues(i), 0.0);
  // X^-H E picks rows of X^-1; solve once for the selected columns.
  CMatrix xinv_ek = g.eigenvectors.partialPivLu().solve(ek.dense());
  return g.eigenvectors * gains.asDiagonal() * xinv_ek;
}

}  // namespace wasn
