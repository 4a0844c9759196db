#pragma once

#include <stdexcept>
#include <string>

namespace amcnet {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A forward pass produced a non-finite value.
class NumericOverflowError : public Error {
 public:
  NumericOverflowError(std::string where, std::size_t layer)
      : Error("numeric overflow: non-finite value in " + where + " (layer " +
              std::to_string(layer) + ")"),
        layer_(layer) {}
  std::size_t layer() const { return layer_; }

 private:
  std::size_t layer_;
};

/// Shapes of arguments disagree with the network or with each other.
class ShapeError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace amcnet
