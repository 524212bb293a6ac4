#pragma once

#include <stdexcept>
#include <string>

namespace mvp {

// Base for every error raised by the library. The CLI prints what() on a
// single line, so messages never contain newlines.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

class DataError : public Error {
 public:
  using Error::Error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

class NumericError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace mvp
