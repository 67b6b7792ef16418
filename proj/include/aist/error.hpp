#pragma once

#include <stdexcept>
#include <string>

namespace aist {

/// Base class for every error raised by the toolkit. The CLI maps the
/// concrete type to a diagnostic `kind` string.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual const char* kind() const noexcept { return "error"; }
};

class ShapeError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "shape"; }
};

class DomainError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "domain"; }
};

class NumericError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "numeric"; }
};

/// A trajectory collapsed onto the origin, where triggering is undefined.
class DegeneracyError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "degeneracy"; }
};

/// A label that the classifier does not know.
class ClassificationDomainError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "classification-domain"; }
};

class UnsupportedConfiguration : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "unsupported-configuration"; }
};

/// Model and abstraction were built from different label vocabularies.
class InconsistencyError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "inconsistency"; }
};

class IoError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "io"; }
};

}  // namespace aist
