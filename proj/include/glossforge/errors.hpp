#pragma once

#include <stdexcept>
#include <string>

namespace glossforge {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A quantity that must be non-zero (or non-empty) collapsed.
class DegenerateError : public Error {
 public:
  using Error::Error;
};

class ShapeMismatch : public Error {
 public:
  using Error::Error;
};

/// Scanner configuration cannot produce a mirror path for some pixel.
class GeometryError : public Error {
 public:
  using Error::Error;
};

class RegistrationError : public Error {
 public:
  using Error::Error;
};

class FabricationError : public Error {
 public:
  using Error::Error;
};

class FormatError : public Error {
 public:
  using Error::Error;
};

/// Missing input file; the CLI maps this to exit status 2.
class MissingInput : public Error {
 public:
  explicit MissingInput(const std::string& path)
      : Error("missing input: " + path), path_(path) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

}  // namespace glossforge
