#pragma once

#include <stdexcept>
#include <string>

namespace wasn {

// Error taxonomy shared by all modules. Each type names the condition it
// reports; call sites add the offending dimensions or values to the message.

struct SingularMatrix : std::runtime_error {
  explicit SingularMatrix(const std::string& what) : std::runtime_error(what) {}
};

struct RankDeficient : std::runtime_error {
  explicit RankDeficient(const std::string& what) : std::runtime_error(what) {}
};

struct DimensionMismatch : std::invalid_argument {
  explicit DimensionMismatch(const std::string& what) : std::invalid_argument(what) {}
};

struct InsufficientData : std::runtime_error {
  explicit InsufficientData(const std::string& what) : std::runtime_error(what) {}
};

struct InfeasiblePattern : std::runtime_error {
  explicit InfeasiblePattern(const std::string& what) : std::runtime_error(what) {}
};

struct MissingBlock : std::runtime_error {
  explicit MissingBlock(const std::string& what) : std::runtime_error(what) {}
};

struct UndefinedMetric : std::runtime_error {
  explicit UndefinedMetric(const std::string& what) : std::runtime_error(what) {}
};

struct EmptyTrace : std::runtime_error {
  explicit EmptyTrace(const std::string& what) : std::runtime_error(what) {}
};

struct LengthMismatch : std::invalid_argument {
  explicit LengthMismatch(const std::string& what) : std::invalid_argument(what) {}
};

struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace wasn
