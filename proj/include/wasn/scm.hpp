#pragma once

#include "wasn/numerics.hpp"

namespace wasn {

// Exponentially weighted sample covariance: R <- beta R + (1-beta) y y^H.
// Starts at identity; value() refuses to serve statistics before the first
// update unless the tracker was warm-started.
class ScmTracker {
 public:
  ScmTracker(Eigen::Index dim, double beta);

  void update(const CVector& y);
  const CMatrix& value() const;
  long frames() const { return frames_; }
  Eigen::Index dim() const { return r_.rows(); }
  double beta() const { return beta_; }

  // Warm start from a known SCM; counts as `frames` observations.
  void warm_start(const CMatrix& r, long frames);

 private:
  CMatrix r_;
  double beta_;
  long frames_ = 0;
};

// Rectangular cross-statistics tracker: R <- beta R + (1-beta) y z^H.
class CrossScmTracker {
 public:
  CrossScmTracker(Eigen::Index rows, Eigen::Index cols, double beta);

  void update(const CVector& y, const CVector& z);
  const CMatrix& value() const;
  long frames() const { return frames_; }

  void warm_start(const CMatrix& r, long frames);

 private:
  CMatrix r_;
  double beta_;
  long frames_ = 0;
};

// VAD-gated pair: Ryy tracked on speech-active frames, Rnnv on noise-only
// frames, speech statistics by subtraction (Rss = Ryy - Rnnv, symmetrized).
class VadGatedScm {
 public:
  VadGatedScm(Eigen::Index dim, double beta);

  void update(const CVector& y, bool voice_active);
  const CMatrix& speech_plus_noise() const;  // Ryy
  const CMatrix& noise_only() const;         // Rnnv
  CMatrix speech() const;                    // Rss
  long speech_frames() const { return ryy_.frames(); }
  long noise_frames() const { return rnnv_.frames(); }

  void warm_start(const CMatrix& ryy, const CMatrix& rnnv, long frames);

 private:
  ScmTracker ryy_;
  ScmTracker rnnv_;
};

}  // namespace wasn
