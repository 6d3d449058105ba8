#pragma once

#include <stdexcept>
#include <string>

namespace holoview {

enum class ErrorKind {
  kRange,
  kReservedBit,
  kDimension,
  kFormat,
  kGeometry,
  kTopology,
  kUnrepairable,
  kInsufficientData,
  kCapacity,
  kPrecondition,
  kIo,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kRange: return "range";
    case ErrorKind::kReservedBit: return "reserved-bit";
    case ErrorKind::kDimension: return "dimension";
    case ErrorKind::kFormat: return "format";
    case ErrorKind::kGeometry: return "geometry";
    case ErrorKind::kTopology: return "topology";
    case ErrorKind::kUnrepairable: return "unrepairable";
    case ErrorKind::kInsufficientData: return "insufficient-data";
    case ErrorKind::kCapacity: return "capacity";
    case ErrorKind::kPrecondition: return "precondition";
    case ErrorKind::kIo: return "io";
  }
  return "unknown";
}

/// Base error for every library failure. `kind()` lets callers branch
/// without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + " error: " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace holoview
