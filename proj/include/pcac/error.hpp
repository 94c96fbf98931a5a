#pragma once

#include <stdexcept>
#include <string>

namespace pcac {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid parameters, malformed scenario files, dimension mismatches.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Euler-angle kinematics evaluated at (or too close to) the singular set.
class SingularityError : public Error {
 public:
  using Error::Error;
};

/// The adaptive integrator could not meet its tolerances.
class IntegrationError : public Error {
 public:
  using Error::Error;
};

/// A discrete input matrix has a nonzero outside the sparsity template.
class TemplateError : public Error {
 public:
  using Error::Error;
};

/// RLS covariance lost symmetry or positive definiteness.
class CovarianceError : public Error {
 public:
  using Error::Error;
};

/// The QP solver failed to produce a usable solution inside the control loop.
class ControllerFault : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace pcac
