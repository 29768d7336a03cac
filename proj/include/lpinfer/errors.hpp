#pragma once

#include <stdexcept>
#include <string>

namespace lpinfer {

/// Base for every error raised by the library. The CLI maps these to exit code 2.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Pivoting exceeded the iteration cap.
class NumericalFailure : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// A combinatorial enumeration would exceed its configured budget.
class CapExceeded : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class EmptyPolyhedron : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class InfiniteValue : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class DegenerateSample : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// A plug-in builder could not produce (A, b) from a (re)sample.
class BuilderFailure : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class EmptyCell : public BuilderFailure {
 public:
  using BuilderFailure::BuilderFailure;
};

class UnboundedInner : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class EmptySet : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Raised when an inference routine needs MFCQ and the LP does not satisfy it.
class RegularityFailure : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class ClosedFormMismatch : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class NumericalInfeasible : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class NonUniqueEta : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace lpinfer
