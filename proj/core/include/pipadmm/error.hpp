#pragma once

#include <stdexcept>
#include <string>

namespace pipadmm {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A loss, penalty, grid or scenario specification failed validation.
class InvalidSpec : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

/// A nonconvex proximal formula was requested outside its validity region.
class ProxConditionViolated : public InvalidSpec {
 public:
  using InvalidSpec::InvalidSpec;
};

/// (a - 1)(eta + lambda2) <= 1 for the Snet proximal operator.
class SnetConditionViolated : public ProxConditionViolated {
 public:
  using ProxConditionViolated::ProxConditionViolated;
};

/// a (eta + lambda2) <= 1 for the Mnet proximal operator.
class MnetConditionViolated : public ProxConditionViolated {
 public:
  using ProxConditionViolated::ProxConditionViolated;
};

class EtaBelowSpectralBound : public Error {
 public:
  using Error::Error;
};

/// Nonfinite values appeared in the iterate.
class Diverged : public Error {
 public:
  using Error::Error;
};

/// A worker did not complete its round; the parallel fit is aborted.
class WorkerFailure : public Error {
 public:
  using Error::Error;
};

/// The requested diagnostic does not apply to this loss.
class NotApplicable : public Error {
 public:
  using Error::Error;
};

class TuneFailed : public Error {
 public:
  using Error::Error;
};

class AuditPreconditionFailed : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace pipadmm
