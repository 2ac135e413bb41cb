#pragma once

#include <stdexcept>
#include <string>

namespace dvlalign {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid configuration value or malformed config file.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// The data does not constrain the requested estimate (rank-deficient geometry,
/// collinear velocity profile).
class DegenerateError : public Error {
 public:
  using Error::Error;
};

/// Streams cannot be paired: rate ratio not integral or time bases disagree.
class SyncError : public Error {
 public:
  using Error::Error;
};

/// Non-finite loss during training.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

/// File missing, unreadable, or not in the expected format.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace dvlalign
