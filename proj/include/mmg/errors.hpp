#ifndef MMG_ERRORS_HPP_
#define MMG_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace mmg {

// Base class for all library-thrown errors. Subclasses map onto the CLI
// exit-code taxonomy: parse/schema problems, missing support for a fit,
// and numerical failures.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Malformed input files (CSV cells, graph edge lists, config JSON).
class ParseError : public Error {
 public:
  using Error::Error;
};

// Input well-formed but inconsistent with the declared schema.
class SchemaError : public Error {
 public:
  using Error::Error;
};

// A required configuration piece (nuisance model, submodel fit) is absent.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Not enough qualifying observations to identify or fit a model.
class NoSupportError : public Error {
 public:
  using Error::Error;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

class SingularityError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class ConvergenceError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class DegenerateFitError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class UnderflowError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class DecompositionError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

// Too many bootstrap replicates or simulation trials failed.
class ResamplingError : public Error {
 public:
  using Error::Error;
};

}  // namespace mmg

#endif  // MMG_ERRORS_HPP_
