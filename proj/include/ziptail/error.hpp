#pragma once

#include <stdexcept>
#include <string>

namespace ziptail {

// Base of everything the library throws on purpose.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid specification or configuration (CLI exit code 2).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Data-dependent failure at run time, e.g. an empty tail (CLI exit code 3).
class StatError : public Error {
 public:
  using Error::Error;
};

}  // namespace ziptail
