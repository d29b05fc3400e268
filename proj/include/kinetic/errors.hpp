#pragma once

#include <stdexcept>
#include <string>

namespace kinetic {

/// Base class for every error raised by the library.
class Error : public std::runtime_error
{
 public:
  using std::runtime_error::runtime_error;
};

#define KINETIC_DEFINE_ERROR(Name)       \
  class Name : public Error              \
  {                                      \
   public:                               \
    using Error::Error;                  \
  }

/// Quadrature error estimate stalled above tolerance or the budget ran out.
KINETIC_DEFINE_ERROR(NonConvergence);
/// Integration interval is empty or reversed.
KINETIC_DEFINE_ERROR(InvalidDomain);
/// Argument outside the mathematical domain of a function.
KINETIC_DEFINE_ERROR(DomainError);
/// A kernel moment that does not exist (k = 0).
KINETIC_DEFINE_ERROR(DivergentMoment);
/// A built spectral table failed one of its invariants.
KINETIC_DEFINE_ERROR(InvariantViolation);
/// Mode vectors and table disagree on the truncation order.
KINETIC_DEFINE_ERROR(TruncationMismatch);
/// Initial data with nonzero collision-invariant modes.
KINETIC_DEFINE_ERROR(InvalidInitialData);
/// A coefficient grew past the configured guard.
KINETIC_DEFINE_ERROR(NumericBlowup);
/// A weighted norm left the representable range.
KINETIC_DEFINE_ERROR(Overflow);
/// A certified inequality was violated.
KINETIC_DEFINE_ERROR(CertificationFailure);
/// Invalid run configuration.
KINETIC_DEFINE_ERROR(ConfigError);

#undef KINETIC_DEFINE_ERROR

}  // namespace kinetic
