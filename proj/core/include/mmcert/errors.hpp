#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace mmcert {

// Base class for every error thrown by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Malformed expression text. `position` is a 0-based byte offset into the input.
class SyntaxError : public Error {
public:
  SyntaxError(const std::string& msg, std::size_t position)
      : Error(msg + " (at position " + std::to_string(position) + ")"),
        position(position) {}
  std::size_t position;
};

// Variable index out of range, block purity violation, or mismatched sizes.
class DimensionError : public Error {
public:
  using Error::Error;
};

// A derivative was requested at a point where an abs() argument vanishes.
// `kinks` lists the offending abs subtrees in serialized form.
class NonsmoothAtPoint : public Error {
public:
  NonsmoothAtPoint(const std::string& msg, std::vector<std::string> kinks)
      : Error(msg), kinks(std::move(kinks)) {}
  std::vector<std::string> kinks;
};

// Evaluation produced inf or nan.
class NonFiniteValue : public Error {
public:
  using Error::Error;
};

// Candidate violates a constraint beyond tolerance.
class InfeasiblePoint : public Error {
public:
  using Error::Error;
};

// Exhaustive enumeration requested beyond its dimension cap.
class DimensionTooLarge : public Error {
public:
  using Error::Error;
};

// Iteration cap or rank failure in a numeric routine.
class NumericalFailure : public Error {
public:
  using Error::Error;
};

// A multiplier polyhedron needed by a calculation is empty.
class EmptyMultiplierSet : public Error {
public:
  using Error::Error;
};

// Joint directional derivative does not split into its block parts at this point.
class SeparationHypothesisFailed : public Error {
public:
  using Error::Error;
};

// Candidate y is not an inner maximizer at the tested resolution.
class NotMaxSide : public Error {
public:
  using Error::Error;
};

// A meshed ball contains no feasible node.
class EmptyFeasibleBall : public Error {
public:
  using Error::Error;
};

// Problem file violates the input schema.
class ValidationError : public Error {
public:
  using Error::Error;
};

// A cross-check between independent code paths disagreed (CLI exit code 3).
class InternalInconsistency : public Error {
public:
  using Error::Error;
};

}  // namespace mmcert
