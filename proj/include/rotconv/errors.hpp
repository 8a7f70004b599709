#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rotconv {

/// Malformed arguments: dimension or grid mismatches, out-of-range values.
class InvalidInput : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// An operation's documented precondition does not hold for its input.
class PreconditionViolation : public std::domain_error {
  public:
    using std::domain_error::domain_error;
};

/// A model state violates the zero-mean / band invariants.
class InvalidState : public std::domain_error {
  public:
    using std::domain_error::domain_error;
};

/// Non-finite coefficient produced by the time stepper.
class BlowUp : public std::runtime_error {
  public:
    BlowUp(std::size_t step, std::string field)
        : std::runtime_error("non-finite value in field '" + field + "' at step " + std::to_string(step)),
          step_(step), field_(std::move(field)) {}

    std::size_t step() const noexcept { return step_; }
    const std::string& field() const noexcept { return field_; }

  private:
    std::size_t step_;
    std::string field_;
};

} // namespace rotconv
