#pragma once

#include <stdexcept>
#include <string>

namespace ctsg {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Tensors or grids whose shapes disagree. Distinct from an invariant
/// violation: a dimension error means the input cannot even be inspected.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A documented precondition of an operation does not hold.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// A Lyapunov certificate that cannot be checked (V < 1, non-positive constant).
class InvalidCertificate : public Error {
 public:
  using Error::Error;
};

/// Quantities that overflow double precision (e.g. exp(theta * g)).
class ModelScaleError : public Error {
 public:
  using Error::Error;
};

/// A non-finite value appeared during value iteration.
class NonFiniteValue : public Error {
 public:
  NonFiniteValue(const std::string& what, int iteration)
      : Error(what), iteration_(iteration) {}
  int iteration() const noexcept { return iteration_; }

 private:
  int iteration_;
};

/// Malformed JSON/CSV input or an unreadable file.
class SchemaError : public Error {
 public:
  using Error::Error;
};

}  // namespace ctsg
