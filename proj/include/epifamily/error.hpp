#pragma once

#include <stdexcept>
#include <string>

namespace epifamily {

/// Base class of all library errors. `exit_code()` is what the CLI returns.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
    virtual const char* kind() const noexcept = 0;
    virtual int exit_code() const noexcept = 0;
};

/// Invalid user input: malformed files, violated preconditions, bad config.
class InputError : public Error {
  public:
    using Error::Error;
    const char* kind() const noexcept override { return "input"; }
    int exit_code() const noexcept override { return 2; }
};

/// Negative value passed where a nonnegative quantity is required.
class DomainError : public InputError {
  public:
    using InputError::InputError;
    const char* kind() const noexcept override { return "domain"; }
};

/// Two series that should abut on the calendar do not.
class AlignmentError : public InputError {
  public:
    using InputError::InputError;
    const char* kind() const noexcept override { return "alignment"; }
};

/// An input satisfies its schema but violates a cross-series contract
/// (e.g. protection against severe disease below protection against infection).
class ContractError : public InputError {
  public:
    using InputError::InputError;
    const char* kind() const noexcept override { return "contract"; }
};

/// Numerical failure: non-convergence, singular ratios, step-size underflow.
class NumericalError : public Error {
  public:
    using Error::Error;
    const char* kind() const noexcept override { return "numerical"; }
    int exit_code() const noexcept override { return 3; }
};

} // namespace epifamily
