#pragma once

#include <stdexcept>

namespace detfuse {

// Base class for all detfuse errors. The CLI maps IoError to exit code 2 and
// every other Error to exit code 1.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IoError : Error {
  using Error::Error;
};

// Malformed input file (bad JSON, missing or mistyped fields).
struct ParseError : Error {
  using Error::Error;
};

// Well-formed input that violates a domain invariant (degenerate box,
// score out of range, unknown class, duplicate image id, ...).
struct ValidationError : Error {
  using Error::Error;
};

// Detection references an image that is not in the manifest.
struct UnknownImageError : ValidationError {
  using ValidationError::ValidationError;
};

struct ConfigError : Error {
  using Error::Error;
};

struct SplitError : Error {
  using Error::Error;
};

// NMS input spans more than one image.
struct MixedImageError : Error {
  using Error::Error;
};

// Matching input spans more than one (image, class) partition.
struct PartitionError : Error {
  using Error::Error;
};

struct EvalError : Error {
  using Error::Error;
};

}  // namespace detfuse
