#pragma once

#include <stdexcept>
#include <string>

namespace flowtree {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on the input was violated (bad parameter, malformed file).
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// The requested object does not fit the finite truncation.
class WindowTooSmall : public Error {
 public:
  using Error::Error;
};

/// Construction would exceed the configured vertex budget.
class SizeCapExceeded : public Error {
 public:
  using Error::Error;
};

/// A check whose hypotheses do not hold for the given arguments.
class Inapplicable : public Error {
 public:
  using Error::Error;
};

}  // namespace flowtree
