#pragma once

#include <stdexcept>
#include <string>

namespace riccati {

// Base class for all contract violations reported by this library.
// Subclasses exist so callers can react to specific failure modes; the
// what() string always carries the offending context.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

class SingularMatrixError : public Error {
 public:
  using Error::Error;
};

class DimensionMismatchError : public Error {
 public:
  using Error::Error;
};

class SizeCapExceededError : public Error {
 public:
  using Error::Error;
};

class NotSymmetricError : public Error {
 public:
  using Error::Error;
};

// Dense solver failures.
class ImaginaryAxisEigenvalueError : public Error {
 public:
  using Error::Error;
};

class NoStabilizingSolutionError : public Error {
 public:
  using Error::Error;
};

class UnstablePencilError : public Error {
 public:
  using Error::Error;
};

// Model loading failures.
class MissingFileError : public Error {
 public:
  using Error::Error;
};

class SingularJ4Error : public Error {
 public:
  using Error::Error;
};

class SingularPencilError : public Error {
 public:
  using Error::Error;
};

// The Riccati solvers require a system without direct feedthrough.
class NonzeroFeedthroughError : public Error {
 public:
  using Error::Error;
};

// Shift engine failures.
class ArnoldiBreakdownError : public Error {
 public:
  using Error::Error;
};

class EmptySpectralDataError : public Error {
 public:
  using Error::Error;
};

// Iterative solver failures.
class SingularShiftedSystemError : public Error {
 public:
  using Error::Error;
};

class IndefiniteProjectedSolutionError : public Error {
 public:
  using Error::Error;
};

class DivergenceDetectedError : public Error {
 public:
  using Error::Error;
};

class UnstableClosedLoopError : public Error {
 public:
  using Error::Error;
};

class NotStabilizableError : public Error {
 public:
  using Error::Error;
};

class ZeroImaginaryShiftError : public Error {
 public:
  using Error::Error;
};

}  // namespace riccati
