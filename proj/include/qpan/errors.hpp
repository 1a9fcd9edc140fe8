#pragma once

#include <stdexcept>
#include <string>

namespace qpan {

/// Base class for library errors. Subclasses map onto CLI exit codes:
/// Error -> 1 (domain), IoError -> 2, GuardError -> 3.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// File or stream problem: missing file, parse failure, bad header.
class IoError : public Error {
 public:
  using Error::Error;
};

/// A size or resource guard was violated (e.g. exhaustive solve on n > 24).
class GuardError : public Error {
 public:
  using Error::Error;
};

// Remote-solver failures, each distinct so callers can branch.
class NetworkError : public Error {
 public:
  using Error::Error;
};

class MalformedResponseError : public Error {
 public:
  using Error::Error;
};

class EnergyMismatchError : public Error {
 public:
  using Error::Error;
};

class NoSamplesError : public Error {
 public:
  using Error::Error;
};

}  // namespace qpan
