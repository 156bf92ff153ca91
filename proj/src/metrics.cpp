#include "wasn/metrics.hpp"

#include <cmath>
#include <limits>

#include "wasn/errors.hpp"

namespace wasn {

double ser_db(std::span<const double> desired,
              std::span<const double> estimate, size_t t_end, size_t window) {
  if (desired.size() != estimate.size())
    throw LengthMismatch("desired and estimate traces differ in length");
  if (desired.empty()) throw EmptyTrace("empty signal trace");
  if (window == 0) throw UndefinedMetric("window must be positive");
  if (t_end < window)
    throw UndefinedMetric("fewer samples than the averaging window");
  if (t_end > desired.size())
    throw LengthMismatch("t_end beyond end of trace");

  double sig = 0.0, err = 0.0;
  for (size_t t = t_end - window; t < t_end; ++t) {
    sig += desired[t] * desired[t];
    const double e = desired[t] - estimate[t];
    err += e * e;
  }
  if (sig == 0.0) throw UndefinedMetric("zero signal energy over the window");
  if (err == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(sig / err);
}

double mse_w(const std::vector<CMatrix>& w, const std::vector<CMatrix>& ref) {
  if (w.empty()) throw EmptyTrace("no filters to compare");
  if (w.size() != ref.size())
    throw LengthMismatch("filter lists differ in length");
  double acc = 0.0;
  for (size_t k = 0; k < w.size(); ++k) {
    if (w[k].rows() != ref[k].rows() || w[k].cols() != ref[k].cols())
      throw DimensionMismatch("filter shapes differ");
    acc += (w[k] - ref[k]).squaredNorm();
  }
  return acc / static_cast<double>(w.size());
}

}  // namespace wasn
