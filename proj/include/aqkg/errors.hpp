#pragma once

#include <stdexcept>
#include <string>

namespace aqkg {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input could not be parsed (CSV rows, model files, transcripts).
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Structurally valid input violating a domain invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Filesystem-level failure (missing file, unwritable path).
class IoError : public Error {
 public:
  using Error::Error;
};

/// A quantization block whose samples are all equal; carries no information
/// and must be skipped by the caller.
class DegenerateBlock : public Error {
 public:
  DegenerateBlock() : Error("degenerate block: all samples equal") {}
};

}  // namespace aqkg
