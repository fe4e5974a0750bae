#pragma once

#include <stdexcept>
#include <string>

namespace urb {

// Base of every error the library throws. CLI maps ValidationError (and its
// subclasses) to exit status 1 and everything else to 2.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

class ParseError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class UnknownComponentError : public Error {
 public:
  explicit UnknownComponentError(const std::string& id) : Error("unknown component " + id) {}
};

class UnknownOperationError : public Error {
 public:
  explicit UnknownOperationError(const std::string& id) : Error("unknown operation " + id) {}
};

class InvalidRowError : public Error {
 public:
  using Error::Error;
};

class NotRecoveringError : public Error {
 public:
  explicit NotRecoveringError(const std::string& id) : Error("component " + id + " is not recovering") {}
};

class SchemaMismatchError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

}  // namespace urb
