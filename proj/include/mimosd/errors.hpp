#pragma once

#include <stdexcept>
#include <string>

namespace mimosd {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// M > N, or mismatched vector/matrix sizes handed to a generator.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// A QR pivot (or the ZF normal matrix) is numerically singular.
class RankDeficientError : public Error {
 public:
  using Error::Error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

// The brute-force oracle refuses search spaces above its configured cap.
class CapExceededError : public Error {
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

class GridMismatchError : public Error {
 public:
  using Error::Error;
};

}  // namespace mimosd
