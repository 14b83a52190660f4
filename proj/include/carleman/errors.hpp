#pragma once

#include <stdexcept>
#include <string>

namespace carleman {

/// Root of every error raised by the library. The CLI maps ConfigError to
/// exit code 2 and everything else to a failed run.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Stencil applied at a node without a one-node margin.
class StencilError : public Error {
 public:
  using Error::Error;
};

/// exp(λφ) or a similar quantity left double range.
class RangeError : public Error {
 public:
  using Error::Error;
};

/// A function was asked for derivatives it cannot provide.
class CapabilityError : public Error {
 public:
  using Error::Error;
};

class PreconditionError : public Error {
 public:
  using Error::Error;
};

class BlowUpError : public Error {
 public:
  using Error::Error;
};

/// Discrete support reached the Dirichlet boundary.
class PropagationError : public Error {
 public:
  using Error::Error;
};

class InputError : public Error {
 public:
  using Error::Error;
};

class StatisticsError : public Error {
 public:
  using Error::Error;
};

class SupportError : public Error {
 public:
  using Error::Error;
};

class GeometryError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace carleman
