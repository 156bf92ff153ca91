#pragma once

#include <span>
#include <vector>

#include "wasn/numerics.hpp"

namespace wasn {

// Signal-to-error ratio in dB over the trailing `window` samples ending at
// (exclusive) index t_end: 10 log10(sum |d|^2 / sum |d - dhat|^2). Throws
// UndefinedMetric until a full window of samples is available or when the
// window carries no signal energy, LengthMismatch when the traces differ in
// length. A zero-error window yields +infinity.
double ser_db(std::span<const double> desired,
              std::span<const double> estimate, size_t t_end, size_t window);

// Mean across nodes of the squared Frobenius distance to the reference
// network-wide filters.
double mse_w(const std::vector<CMatrix>& w, const std::vector<CMatrix>& ref);

}  // namespace wasn
