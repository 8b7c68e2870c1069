#pragma once

#include <stdexcept>
#include <string>

namespace iekf {

/// Root of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Wrong dimensions, mismatched groups, or out-of-range parameters.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class NotOnGroup : public Error {
 public:
  using Error::Error;
};

class NotInAlgebra : public Error {
 public:
  using Error::Error;
};

/// Logarithm requested at or beyond the principal-branch limit.
class BranchCutError : public Error {
 public:
  using Error::Error;
};

class ProjectionFailure : public Error {
 public:
  using Error::Error;
};

/// Non-finite values appeared during integration or an update.
class NumericalFailure : public Error {
 public:
  using Error::Error;
};

/// Innovation covariance too ill-conditioned; the update was not applied.
class UpdateSkipped : public Error {
 public:
  using Error::Error;
};

/// An analytic Jacobian disagrees with its numerical counterpart.
class ModelInconsistency : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  ConfigError(int line, const std::string& what)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

}  // namespace iekf
