#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "wasn/errors.hpp"

namespace wasn {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;

namespace numerics {

// Relative diagonal loading floor: eps * trace(A)/dim added to the diagonal
// before factorizing, when loading is enabled.
inline constexpr double kLoadingEps = 1e-10;

struct SolveOptions {
  bool diagonal_loading = true;
  double eps = kLoadingEps;
};

// (A + A^H)/2 with the diagonal forced real.
CMatrix symmetrize(const CMatrix& a);

bool is_hermitian(const CMatrix& a, double tol = 1e-12);

// X with A X = B for Hermitian positive (semi)definite A. With loading
// disabled, throws SingularMatrix when the smallest eigenvalue of A is at or
// below the loading floor.
CMatrix hermitian_solve(const CMatrix& a, const CMatrix& b,
                        const SolveOptions& opts = {});

// Generalized Hermitian eigendecomposition A x = lambda B x with B positive
// definite: eigenvalues descending, eigenvectors B-orthonormal columns
// (X^H B X = I). Throws SingularMatrix when B (after optional loading) is
// not positive definite.
struct Gevd {
  RVector eigenvalues;
  CMatrix eigenvectors;
};
Gevd gevd(const CMatrix& a, const CMatrix& b, const SolveOptions& opts = {});

// Cosines of the principal angles between the column spaces of U and V,
// descending. Throws RankDeficient when either matrix has numerically
// dependent columns (relative sv tolerance 1e-10).
std::vector<double> principal_angle_cosines(const CMatrix& u,
                                            const CMatrix& v);

// Largest principal angle in radians, acos-clamped.
double max_principal_angle(const CMatrix& u, const CMatrix& v);

}  // namespace numerics
}  // namespace wasn
