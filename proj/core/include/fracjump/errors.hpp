#pragma once

#include <stdexcept>
#include <string>

namespace fracjump {

// Invalid argument or violated precondition.
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Evaluation at the pole of a kernel.
class SingularityError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// A field was asked for a value outside the set where it is defined.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Operation is defined but not for this configuration (e.g. a closed form
// that only exists in R^3).
class UnsupportedError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Quadrature ran out of its refinement budget. Carries the value accumulated
// so far so callers can still report it.
class QuadratureError : public std::runtime_error {
 public:
  QuadratureError(const std::string& what, double partial_norm)
      : std::runtime_error(what), partial_norm_(partial_norm) {}
  double partial_norm() const noexcept { return partial_norm_; }

 private:
  double partial_norm_;
};

// A jump problem was requested whose data does not meet the solvability
// threshold and the caller did not force it.
class SolvabilityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace fracjump
