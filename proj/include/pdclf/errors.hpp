#pragma once

#include <stdexcept>
#include <string>

namespace pdclf {

/// Base class for all library errors.
struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

struct VarSpaceMismatch : Error {
  using Error::Error;
};

struct DimensionMismatch : Error {
  using Error::Error;
};

struct UnknownVariable : Error {
  using Error::Error;
};

struct MissingAssignment : Error {
  using Error::Error;
};

/// Raised when an operation would create a product of two decision variables
/// (the compiled program must stay affine in decisions).
struct BilinearTerm : Error {
  using Error::Error;
};

struct ParseError : Error {
  using Error::Error;
};

struct ScenarioError : Error {
  using Error::Error;
};

struct SolverFailure : Error {
  using Error::Error;
};

struct NumericalGuard : Error {
  using Error::Error;
};

}  // namespace pdclf
