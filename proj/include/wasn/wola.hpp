#pragma once

#include <span>
#include <vector>

#include "wasn/numerics.hpp"

namespace wasn {

struct WolaConfig {
  int dft_size = 1024;
  double overlap = 0.5;
  double sample_rate = 16000.0;

  int hop() const { return static_cast<int>(dft_size * (1.0 - overlap)); }
  int num_bins() const { return dft_size / 2 + 1; }
  void validate() const;
};

// Square-root Hann, w[n] = sin(pi n / N). At 50% overlap the squared
// windows sum to one, which is what makes analysis + synthesis an identity.
std::vector<double> sqrt_hann_window(int n);

struct Spectrogram {
  int dft_size = 0;
  std::vector<CVector> frames;  // each dft_size/2 + 1 bins

  int num_frames() const { return static_cast<int>(frames.size()); }
};

// Frame t covers samples [t*hop, t*hop + N); only complete frames are
// produced. Throws InsufficientData when x is shorter than one frame.
Spectrogram wola_analyze(std::span<const double> x, const WolaConfig& cfg);

// Weighted overlap-add inverse; output length (T-1)*hop + N. Interior
// samples (beyond the first and last N-hop) reconstruct the input exactly.
std::vector<double> wola_synthesize(const Spectrogram& spec,
                                    const WolaConfig& cfg);

// Frame-rate voice activity from the clean speech signal: a frame is active
// when its windowed energy exceeds rel_threshold times the maximum frame
// energy.
std::vector<bool> oracle_vad(std::span<const double> clean_speech,
                             const WolaConfig& cfg,
                             double rel_threshold = 1e-4);

}  // namespace wasn
