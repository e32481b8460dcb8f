#pragma once

#include <stdexcept>
#include <string>

namespace vsr {

/// Base class for every error thrown by this library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Malformed serialized expression: unknown token, leftover or missing tokens.
class ParseError : public Error {
public:
  using Error::Error;
};

/// Equation file violates the schema (bad key, bad domain, out-of-range variable).
class SchemaError : public Error {
public:
  using Error::Error;
};

/// Structurally invalid tree: wrong arity, missing constant value,
/// variable index outside the input matrix.
class StructuralError : public Error {
public:
  using Error::Error;
};

/// Invalid configuration or argument value.
class ConfigError : public Error {
public:
  using Error::Error;
};

/// A normalized metric was requested for a target with zero variance.
class DegenerateVarianceError : public Error {
public:
  using Error::Error;
};

} // namespace vsr
