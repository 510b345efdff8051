#pragma once

#include <stdexcept>
#include <string>

namespace negimag {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand shapes are incompatible (non-square, mismatched partitions, ...).
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Input contains NaN/Inf or violates a stated value constraint.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Linear solve or inversion refused: the condition estimate is too large.
class SingularMatrixError : public Error {
 public:
  using Error::Error;
};

/// Iterative kernel did not converge within its budget.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

/// Frequency response requested at (or numerically at) a pole.
class PoleProximityError : public Error {
 public:
  using Error::Error;
};

/// Feedback interconnection contains an algebraic loop.
class IllPosedLoopError : public Error {
 public:
  using Error::Error;
};

/// Malformed system or plant file.
class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace negimag
