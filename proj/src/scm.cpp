#include "wasn/scm.hpp"

#include "wasn/kernels.hpp"

namespace wasn {

namespace {

void check_beta(double beta) {
  if (!(beta > 0.0 && beta < 1.0))
    throw DimensionMismatch("scm tracker: beta must lie in (0, 1)");
}

}  // namespace

ScmTracker::ScmTracker(Eigen::Index dim, double beta)
    : r_(CMatrix::Identity(dim, dim)), beta_(beta) {
  check_beta(beta);
  if (dim < 1) throw DimensionMismatch("scm tracker: dim < 1");
}

void ScmTracker::update(const CVector& y) {
  if (y.size() != r_.rows())
    throw DimensionMismatch("scm tracker: frame dim mismatch");
  kernels::herm_rank1_update(r_.data(), static_cast<std::size_t>(r_.rows()),
                             y.data(), beta_, 1.0 - beta_);
  ++frames_;
}

const CMatrix& ScmTracker::value() const {
  if (frames_ == 0)
    throw InsufficientData("scm tracker: no frames accumulated");
  return r_;
}

void ScmTracker::warm_start(const CMatrix& r, long frames) {
  if (r.rows() != r_.rows() || r.cols() != r_.cols())
    throw DimensionMismatch("scm tracker: warm start dim mismatch");
  if (frames < 1)
    throw InsufficientData("scm tracker: warm start needs frames >= 1");
  r_ = numerics::symmetrize(r);
  frames_ = frames;
}

CrossScmTracker::CrossScmTracker(Eigen::Index rows, Eigen::Index cols,
                                 double beta)
    : r_(CMatrix::Zero(rows, cols)), beta_(beta) {
  check_beta(beta);
  if (rows < 1 || cols < 0)
    throw DimensionMismatch("cross scm tracker: bad shape");
}

void CrossScmTracker::update(const CVector& y, const CVector& z) {
  if (y.size() != r_.rows() || z.size() != r_.cols())
    throw DimensionMismatch("cross scm tracker: frame dim mismatch");
  r_ = beta_ * r_ + (1.0 - beta_) * (y * z.adjoint());
  ++frames_;
}

const CMatrix& CrossScmTracker::value() const {
  if (frames_ == 0)
    throw InsufficientData("cross scm tracker: no frames accumulated");
  return r_;
}

void CrossScmTracker::warm_start(const CMatrix& r, long frames) {
  if (r.rows() != r_.rows() || r.cols() != r_.cols())
    throw DimensionMismatch("cross scm tracker: warm start dim mismatch");
  if (frames < 1)
    throw InsufficientData("cross scm tracker: warm start needs frames >= 1");
  r_ = r;
  frames_ = frames;
}

VadGatedScm::VadGatedScm(Eigen::Index dim, double beta)
    : ryy_(dim, beta), rnnv_(dim, beta) {}

void VadGatedScm::update(const CVector& y, bool voice_active) {
  if (voice_active)
    ryy_.update(y);
  else
    rnnv_.update(y);
}

const CMatrix& VadGatedScm::speech_plus_noise() const { return ryy_.value(); }

const CMatrix& VadGatedScm::noise_only() const { return rnnv_.value(); }

CMatrix VadGatedScm::speech() const {
  return numerics::symmetrize(ryy_.value() - rnnv_.value());
}

void VadGatedScm::warm_start(const CMatrix& ryy, const CMatrix& rnnv,
                             long frames) {
  ryy_.warm_start(ryy, frames);
  rnnv_.warm_start(rnnv, frames);
}

}  // namespace wasn
