#pragma once

#include <stdexcept>
#include <string>

namespace renev {

/// Base class for every error the library reports.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A configuration document or value failed validation.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// An enumeration or sampling bound would be exceeded.
class CapacityError : public Error {
 public:
  using Error::Error;
};

/// A caller broke an operation's precondition.
class ContractViolation : public Error {
 public:
  using Error::Error;
};

}  // namespace renev
