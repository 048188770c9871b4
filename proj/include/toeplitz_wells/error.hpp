#pragma once

#include <stdexcept>
#include <string>

namespace toeplitz_wells {

/// Base class for all library failures. Each subclass names one failure
/// family so callers (and the CLI) can report it without string matching.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A multi-index or degree exceeds the active Fock truncation.
class TruncationError : public Error {
 public:
  using Error::Error;
};

/// Unsupported polynomial degree or shape for the requested operation.
class UnsupportedDegreeError : public Error {
 public:
  using Error::Error;
};

/// A quadratic form or Hessian is not positive definite.
class DegeneracyError : public Error {
 public:
  using Error::Error;
};

/// Grid too coarse for the magnetic length.
class ResolutionError : public Error {
 public:
  explicit ResolutionError(const std::string& what, int required_grid_n)
      : Error(what), required_grid_n_(required_grid_n) {}
  int required_grid_n() const noexcept { return required_grid_n_; }

 private:
  int required_grid_n_;
};

/// No spectral gap separating the low cluster from the rest.
class NoGapError : public Error {
 public:
  using Error::Error;
};

/// Iterative method hit its cap without reaching tolerance.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

/// Matrix / grid / basis dimensions do not agree.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Invalid magnetic field or symbol data.
class FieldError : public Error {
 public:
  using Error::Error;
};

/// Experiment configuration failed validation. `path` is a JSON pointer to
/// the offending key.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& path, const std::string& message)
      : Error(path + ": " + message), path_(path) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

}  // namespace toeplitz_wells
