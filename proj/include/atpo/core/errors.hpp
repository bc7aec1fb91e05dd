#pragma once

#include <stdexcept>
#include <string>

namespace atpo {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An observation has probability zero under the model that was asked to explain it.
class ZeroLikelihood : public Error {
 public:
  using Error::Error;
};

/// Every hypothesis in a model library has been ruled out by the evidence.
class AllModelsPruned : public Error {
 public:
  using Error::Error;
};

class NonconvergenceBudget : public Error {
 public:
  using Error::Error;
};

/// Bad domain spec, capability mismatch between an agent and a domain, etc.
class ConfigurationError : public Error {
 public:
  using Error::Error;
};

class FormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace atpo
