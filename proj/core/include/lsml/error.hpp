#pragma once

#include <stdexcept>
#include <string>

namespace lsml {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Field dimensions do not agree or are too small for the operation.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// An argument is outside its documented domain.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// A mask is all-true or all-false where a mixed mask is required.
class DegenerateMaskError : public Error {
 public:
  using Error::Error;
};

/// Training cannot proceed (e.g. every example has collapsed).
class TrainingError : public Error {
 public:
  using Error::Error;
};

/// A model diagnostic is undefined for the given data.
class DiagnosticError : public Error {
 public:
  using Error::Error;
};

/// A file is malformed, truncated or has an unsupported version.
class FormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace lsml
