#pragma once

#include <stdexcept>
#include <string>

namespace mag {

// Error categories surface in the CLI's machine-readable error JSON.
enum class ErrorKind {
  kParse,
  kBounds,
  kCapacity,
  kConfig,
  kDimension,
  kNumerical,
  kValidation,
  kCheckpoint,
  kFile,
  kDegenerate,
  kSampling,
};

const char* ErrorKindName(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

inline const char* ErrorKindName(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kParse: return "parse";
    case ErrorKind::kBounds: return "bounds";
    case ErrorKind::kCapacity: return "capacity";
    case ErrorKind::kConfig: return "config";
    case ErrorKind::kDimension: return "dimension";
    case ErrorKind::kNumerical: return "numerical";
    case ErrorKind::kValidation: return "validation";
    case ErrorKind::kCheckpoint: return "checkpoint";
    case ErrorKind::kFile: return "file";
    case ErrorKind::kDegenerate: return "degenerate";
    case ErrorKind::kSampling: return "sampling";
  }
  return "unknown";
}

}  // namespace mag
