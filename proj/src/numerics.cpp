#include "wasn/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace wasn::numerics {

namespace {

void require_square(const CMatrix& a, const char* who) {
  if (a.rows() != a.cols())
    throw DimensionMismatch(std::string(who) + ": matrix not square");
}

double loading_floor(const CMatrix& a, double eps) {
  const double tr = a.real().diagonal().sum();
  return a.rows() > 0 ? eps * tr / static_cast<double>(a.rows()) : 0.0;
}

// Thin orthonormal basis of the column space; throws when the columns are
// numerically dependent.
CMatrix orthonormal_basis(const CMatrix& m, const char* who) {
  if (m.cols() == 0)
    throw DimensionMismatch(std::string(who) + ": empty column set");
  Eigen::HouseholderQR<CMatrix> qr(m);
  CMatrix r = qr.matrixQR().topRows(m.cols()).triangularView<Eigen::Upper>();
  double dmax = 0.0;
  for (Eigen::Index i = 0; i < m.cols(); ++i)
    dmax = std::max(dmax, std::abs(r(i, i)));
  for (Eigen::Index i = 0; i < m.cols(); ++i) {
    if (std::abs(r(i, i)) <= 1e-10 * dmax)
      throw RankDeficient(std::string(who) + ": dependent columns");
  }
  CMatrix q = CMatrix::Identity(m.rows(), m.cols());
  return qr.householderQ() * q;
}

}  // namespace

CMatrix symmetrize(const CMatrix& a) {
  require_square(a, "symmetrize");
  CMatrix h = 0.5 * (a + a.adjoint());
  for (Eigen::Index i = 0; i < h.rows(); ++i) h(i, i) = cplx(h(i, i).real(), 0.0);
  return h;
}

bool is_hermitian(const CMatrix& a, double tol) {
  if (a.rows() != a.cols()) return false;
  const double scale = std::max(1.0, a.norm());
  return (a - a.adjoint()).norm() <= tol * scale;
}

CMatrix hermitian_solve(const CMatrix& a, const CMatrix& b,
                        const SolveOptions& opts) {
  require_square(a, "hermitian_solve");
  if (a.rows() != b.rows())
    throw DimensionMismatch("hermitian_solve: rhs rows != matrix dim");
  const Eigen::Index n = a.rows();
  if (n == 0) return CMatrix(0, b.cols());

  CMatrix h = symmetrize(a);
  const double floor = loading_floor(h, opts.eps);
  if (!opts.diagonal_loading) {
    Eigen::SelfAdjointEigenSolver<CMatrix> es(h, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() <= floor)
      throw SingularMatrix("hermitian_solve: matrix singular at loading floor");
  } else {
    h.diagonal().array() += floor;
  }

  Eigen::LLT<CMatrix> llt(h);
  if (llt.info() != Eigen::Success) {
    // Loading keeps this path rare (indefinite inputs); LDLT still factors.
    Eigen::LDLT<CMatrix> ldlt(h);
    if (ldlt.info() != Eigen::Success)
      throw SingularMatrix("hermitian_solve: factorization failed");
    CMatrix x = ldlt.solve(b);
    x += ldlt.solve(b - h * x);
    return x;
  }
  CMatrix x = llt.solve(b);
  // One refinement step; cheap relative to the factorization and tightens
  // the residual toward the 1e-9 contract on ill-conditioned systems.
  x += llt.solve(b - h * x);
  return x;
}

Gevd gevd(const CMatrix& a, const CMatrix& b, const SolveOptions& opts) {
  require_square(a, "gevd");
  require_square(b, "gevd");
  if (a.rows() != b.rows()) throw DimensionMismatch("gevd: dim mismatch");
  const Eigen::Index n = a.rows();
  if (n == 0) return {RVector(0), CMatrix(0, 0)};

  CMatrix bh = symmetrize(b);
  if (opts.diagonal_loading)
    bh.diagonal().array() += loading_floor(bh, opts.eps);
  Eigen::LLT<CMatrix> llt(bh);
  if (llt.info() != Eigen::Success)
    throw SingularMatrix("gevd: B not positive definite");

  // B = L L^H reduces A x = lambda B x to the standard Hermitian problem
  // (L^-1 A L^-H) v = lambda v with x = L^-H v.
  CMatrix l = llt.matrixL();
  CMatrix c = l.triangularView<Eigen::Lower>().solve(symmetrize(a));
  c = l.triangularView<Eigen::Lower>()
          .solve(c.adjoint())
          .adjoint();
  Eigen::SelfAdjointEigenSolver<CMatrix> es(symmetrize(c));
  if (es.info() != Eigen::Success)
    throw SingularMatrix("gevd: eigensolver failed");

  // Ascending from Eigen; emit descending. Stable index sort keeps ties in a
  // deterministic order.
  std::vector<Eigen::Index> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](Eigen::Index i, Eigen::Index j) {
    return es.eigenvalues()(i) > es.eigenvalues()(j);
  });

  Gevd out;
  out.eigenvalues.resize(n);
  out.eigenvectors.resize(n, n);
  CMatrix x = l.adjoint().triangularView<Eigen::Upper>().solve(
      CMatrix(es.eigenvectors()));
  for (Eigen::Index i = 0; i < n; ++i) {
    out.eigenvalues(i) = es.eigenvalues()(idx[i]);
    out.eigenvectors.col(i) = x.col(idx[i]);
  }
  return out;
}

std::vector<double> principal_angle_cosines(const CMatrix& u,
                                            const CMatrix& v) {
  if (u.rows() != v.rows())
    throw DimensionMismatch("principal_angle_cosines: row dim mismatch");
  CMatrix qu = orthonormal_basis(u, "principal_angle_cosines");
  CMatrix qv = orthonormal_basis(v, "principal_angle_cosines");
  Eigen::JacobiSVD<CMatrix> svd(qu.adjoint() * qv);
  std::vector<double> cosines(svd.singularValues().size());
  for (size_t i = 0; i < cosines.size(); ++i)
    cosines[i] = std::min(1.0, svd.singularValues()(static_cast<Eigen::Index>(i)));
  return cosines;  // SVD order is descending already
}

double max_principal_angle(const CMatrix& u, const CMatrix& v) {
  const auto cosines = principal_angle_cosines(u, v);
  // Smallest cosine = largest angle.
  return std::acos(std::clamp(cosines.back(), -1.0, 1.0));
}

}  // namespace wasn::numerics
