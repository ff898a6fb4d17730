#pragma once

#include <stdexcept>
#include <string>

namespace tpbb {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid configuration or parameter. The message names the offending field.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// The discounted Riccati recursion did not reach a finite fixed point.
class NoStabilizingSolution : public Error {
 public:
  using Error::Error;
};

class EmptyFollowerSet : public Error {
 public:
  using Error::Error;
};

class EmptySampleSet : public Error {
 public:
  using Error::Error;
};

/// Collision counts exceed the available particles (scaling/CFL violation).
class InfeasibleCounts : public Error {
 public:
  using Error::Error;
};

/// Reading or writing an artifact file failed.
class PersistFailure : public Error {
 public:
  using Error::Error;
};

}  // namespace tpbb
