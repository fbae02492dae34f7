#pragma once

#include <stdexcept>
#include <string>

namespace graphtube {

/// Base class of all library errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Ill-formed graph input (non-unit directions, short edges, bad widths...).
struct GeometryError : Error {
  using Error::Error;
};

/// A point that must lie strictly inside the tube does not.
struct OutOfTubeError : Error {
  using Error::Error;
};

/// Iterative nearest-point search failed to converge.
struct ProjectionError : Error {
  using Error::Error;
};

/// Confined step could not be completed within the halving budget;
/// signals that the configured dt is too coarse for the geometry.
struct SubstepExhaustionError : Error {
  explicit SubstepExhaustionError(const std::string& what, long path = -1)
      : Error(what), path_index(path) {}
  long path_index;
};

/// Adaptive quadrature did not reach the requested absolute tolerance.
struct QuadratureError : Error {
  using Error::Error;
};

/// Test function violates the generator domain conditions.
struct DomainViolationError : Error {
  using Error::Error;
};

/// Malformed JSON or CSV input; the message carries line and column.
struct ParseError : Error {
  using Error::Error;
};

/// Experiment configuration rejected before any simulation ran.
struct ValidationError : Error {
  using Error::Error;
};

/// A run produced data that must not be interpreted (e.g. too many paths
/// without a first passage within the horizon).
struct ExperimentInvalidError : Error {
  using Error::Error;
};

}  // namespace graphtube
