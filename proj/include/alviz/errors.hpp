#pragma once

#include <stdexcept>
#include <string>

namespace alviz {

// Invalid parameters or configuration. The CLI maps this to exit code 1.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Unreadable or unwritable files. The CLI maps this to exit code 2.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A file was read but its contents are unusable (bad cell, bad schema).
class DataError : public IoError {
 public:
  using IoError::IoError;
};

}  // namespace alviz
