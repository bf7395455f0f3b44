#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hcm {

// Base for every recoverable failure raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Shapes that do not line up. `layer` is -1 when no layer is involved.
class DimensionError : public Error {
 public:
  DimensionError(const std::string& what, int layer = -1)
      : Error(what), layer_(layer) {}
  int layer() const { return layer_; }

 private:
  int layer_;
};

// A gradient or parameter entry became NaN/Inf.
class NonFiniteError : public Error {
 public:
  NonFiniteError(const std::string& what, int layer, std::size_t row,
                 std::size_t col)
      : Error(what), layer_(layer), row_(row), col_(col) {}
  int layer() const { return layer_; }
  std::size_t row() const { return row_; }
  std::size_t col() const { return col_; }

 private:
  int layer_;
  std::size_t row_;
  std::size_t col_;
};

// Argument outside the mathematical domain of an operation
// (zero target, negative loss argument, q outside (0,1), ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Malformed or inconsistent input data (CSV rows, columns, empty files).
class DataError : public Error {
 public:
  DataError(const std::string& what, std::size_t line = 0)
      : Error(what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Invalid run configuration; `field` is the dotted JSON path.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& field, const std::string& what)
      : Error(field.empty() ? what : field + ": " + what), field_(field) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

// Raised by temperature fitting when every score is zero.
class UncalibratableError : public Error {
 public:
  using Error::Error;
};

// Non-finite loss during training.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, int epoch)
      : Error(what), epoch_(epoch) {}
  int epoch() const { return epoch_; }

 private:
  int epoch_;
};

}  // namespace hcm
