#pragma once

#include <stdexcept>
#include <string>

namespace weylrec {

/// Input violates a mathematical hypothesis (assumptions, Delta0_k != 0, class G0).
class AssumptionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or unreadable input.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Step underflow, quadrature depth, ill-conditioned solves, non-convergent limits.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Caller passed arguments outside an operation's domain (grade overflow etc.).
class UsageError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace weylrec
