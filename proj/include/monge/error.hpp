#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace monge {

enum class ErrorCode {
  kInvalidArgument,
  kDimensionMismatch,
  kNonFinite,
  kZeroNorm,           // cosine of a zero vector
  kCoincidentPoints,   // inverse-square cost at x == y
  kOutOfDomain,        // sphere coordinates outside [0,2pi) x [0,pi]
  kMissingLabels,
  kSingularGradient,   // arccos gradient near +-1
  kNotSorted,
  kNotPositiveDefinite,
  kNegativeGapSum,
  kDiverged,
  kIo,
  kParse,
  kEmpty,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid_argument";
    case ErrorCode::kDimensionMismatch: return "dimension_mismatch";
    case ErrorCode::kNonFinite: return "non_finite";
    case ErrorCode::kZeroNorm: return "zero_norm";
    case ErrorCode::kCoincidentPoints: return "coincident_points";
    case ErrorCode::kOutOfDomain: return "out_of_domain";
    case ErrorCode::kMissingLabels: return "missing_labels";
    case ErrorCode::kSingularGradient: return "singular_gradient";
    case ErrorCode::kNotSorted: return "not_sorted";
    case ErrorCode::kNotPositiveDefinite: return "not_positive_definite";
    case ErrorCode::kNegativeGapSum: return "negative_gap_sum";
    case ErrorCode::kDiverged: return "diverged";
    case ErrorCode::kIo: return "io";
    case ErrorCode::kParse: return "parse";
    case ErrorCode::kEmpty: return "empty";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline void require(bool condition, ErrorCode code, const std::string& what) {
  if (!condition) throw Error(code, what);
}

}  // namespace monge
