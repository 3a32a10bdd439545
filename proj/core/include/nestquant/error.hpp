#pragma once

#include <stdexcept>
#include <string>

namespace nestquant {

// Base for all library failures that are not plain precondition violations.
// Precondition violations (bad arguments) throw std::invalid_argument.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// File missing, truncated or carrying the wrong magic/version.
class IoError : public Error {
 public:
  using Error::Error;
};

// Incompatible shapes or quantizer configurations between operands.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Factorization failures, singular systems, infeasible optimization inputs.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace nestquant
