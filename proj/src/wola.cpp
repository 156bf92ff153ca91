#include "wasn/wola.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <unsupported/Eigen/FFT>

#include "wasn/errors.hpp"
#include "wasn/kernels.hpp"

namespace wasn {

void WolaConfig::validate() const {
  if (dft_size < 4 || (dft_size & (dft_size - 1)) != 0)
    throw ConfigError("dft_size must be a power of two >= 4");
  if (overlap != 0.5) throw ConfigError("only 50% overlap is supported");
  if (sample_rate <= 0) throw ConfigError("sample_rate must be positive");
}

std::vector<double> sqrt_hann_window(int n) {
  std::vector<double> w(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i)
    w[static_cast<size_t>(i)] = std::sin(std::numbers::pi * i / n);
  return w;
}

Spectrogram wola_analyze(std::span<const double> x, const WolaConfig& cfg) {
  cfg.validate();
  const int n = cfg.dft_size;
  const int hop = cfg.hop();
  if (x.size() < static_cast<size_t>(n))
    throw InsufficientData("signal shorter than one analysis frame");
  const int frames = static_cast<int>((x.size() - static_cast<size_t>(n)) /
                                      static_cast<size_t>(hop)) +
                     1;
  const std::vector<double> win = sqrt_hann_window(n);

  Eigen::FFT<double> fft;
  fft.SetFlag(Eigen::FFT<double>::HalfSpectrum);

  Spectrogram spec;
  spec.dft_size = n;
  spec.frames.reserve(static_cast<size_t>(frames));
  std::vector<double> buf(static_cast<size_t>(n));
  std::vector<std::complex<double>> bins;
  for (int t = 0; t < frames; ++t) {
    kernels::apply_window(x.data() + static_cast<size_t>(t) * hop, win.data(),
                          buf.data(), static_cast<size_t>(n));
    fft.fwd(bins, buf);
    spec.frames.push_back(
        Eigen::Map<const CVector>(bins.data(), cfg.num_bins()));
  }
  return spec;
}

std::vector<double> wola_synthesize(const Spectrogram& spec,
                                    const WolaConfig& cfg) {
  cfg.validate();
  if (spec.dft_size != cfg.dft_size)
    throw DimensionMismatch("spectrogram dft_size does not match config");
  if (spec.frames.empty()) throw EmptyTrace("spectrogram has no frames");
  const int n = cfg.dft_size;
  const int hop = cfg.hop();
  const std::vector<double> win = sqrt_hann_window(n);

  Eigen::FFT<double> fft;
  fft.SetFlag(Eigen::FFT<double>::HalfSpectrum);

  std::vector<double> out(
      static_cast<size_t>(spec.num_frames() - 1) * hop + static_cast<size_t>(n),
      0.0);
  std::vector<std::complex<double>> bins(static_cast<size_t>(cfg.num_bins()));
  std::vector<double> frame(static_cast<size_t>(n));
  for (int t = 0; t < spec.num_frames(); ++t) {
    const CVector& f = spec.frames[static_cast<size_t>(t)];
    if (f.size() != cfg.num_bins())
      throw DimensionMismatch("frame has wrong number of bins");
    Eigen::Map<CVector>(bins.data(), f.size()) = f;
    fft.inv(frame, bins, n);
    kernels::overlap_add(out.data() + static_cast<size_t>(t) * hop,
                         frame.data(), win.data(), static_cast<size_t>(n));
  }
  return out;
}

std::vector<bool> oracle_vad(std::span<const double> clean_speech,
                             const WolaConfig& cfg, double rel_threshold) {
  cfg.validate();
  const int n = cfg.dft_size;
  const int hop = cfg.hop();
  if (clean_speech.size() < static_cast<size_t>(n))
    throw InsufficientData("signal shorter than one analysis frame");
  const int frames =
      static_cast<int>((clean_speech.size() - static_cast<size_t>(n)) /
                       static_cast<size_t>(hop)) +
      1;
  const std::vector<double> win = sqrt_hann_window(n);

  std::vector<double> energy(static_cast<size_t>(frames));
  std::vector<double> buf(static_cast<size_t>(n));
  double peak = 0.0;
  for (int t = 0; t < frames; ++t) {
    kernels::apply_window(clean_speech.data() + static_cast<size_t>(t) * hop,
                          win.data(), buf.data(), static_cast<size_t>(n));
    double e = 0.0;
    for (double v : buf) e += v * v;
    energy[static_cast<size_t>(t)] = e;
    peak = std::max(peak, e);
  }
  std::vector<bool> vad(static_cast<size_t>(frames));
  const double thr = rel_threshold * peak;
  for (int t = 0; t < frames; ++t)
    vad[static_cast<size_t>(t)] = energy[static_cast<size_t>(t)] > thr;
  return vad;
}

}  // namespace wasn
