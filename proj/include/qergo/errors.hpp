#ifndef QERGO_ERRORS_HPP
#define QERGO_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace qergo {

// Root of the library's error hierarchy. Every failure mode listed in the
// module contracts gets its own type so callers can catch them separately.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SelfLoopError : Error {
  using Error::Error;
};
struct MultiEdgeError : Error {
  using Error::Error;
};
struct DisconnectedGraphError : Error {
  using Error::Error;
};
struct DegreeOutOfRangeError : Error {
  using Error::Error;
};
struct PathBudgetExceededError : Error {
  using Error::Error;
};
struct RejectionBudgetExceededError : Error {
  using Error::Error;
};
struct EigensolveFailureError : Error {
  using Error::Error;
};
struct SizeCapExceededError : Error {
  using Error::Error;
};
struct RealAxisParameterError : Error {
  using Error::Error;
};
struct SupBoundViolatedError : Error {
  using Error::Error;
};
struct KZeroNotEdgeBasedError : Error {
  using Error::Error;
};
struct DegenerateDenominatorError : Error {
  using Error::Error;
};
struct OracleBudgetExceededError : Error {
  using Error::Error;
};
struct ConfigError : Error {
  using Error::Error;
};

// Fixed-point solver gave up. `rung` is the continuation rung that stalled
// (-1 when plain iteration was used).
struct NoConvergenceError : Error {
  explicit NoConvergenceError(const std::string& what, int rung_ = -1)
      : Error(what), rung(rung_) {}
  int rung;
};

struct HalfPlaneViolationError : Error {
  using Error::Error;
};

}  // namespace qergo

#endif  // QERGO_ERRORS_HPP
