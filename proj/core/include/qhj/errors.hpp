#pragma once

#include <stdexcept>
#include <string>

namespace qhj {

// Root of every error raised by the library. Callers that only need to know
// "the computation could not be carried out" catch this.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class PreconditionError : public Error {
 public:
  using Error::Error;
};

class UnsupportedEnergyError : public Error {
 public:
  using Error::Error;
};

class IntegrationFailure : public Error {
 public:
  using Error::Error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class TurningPointError : public Error {
 public:
  TurningPointError(const std::string& what, double x) : Error(what), x_(x) {}
  double x() const noexcept { return x_; }

 private:
  double x_;
};

class StencilInconsistency : public Error {
 public:
  using Error::Error;
};

class SingularConfiguration : public Error {
 public:
  using Error::Error;
};

class SingularVelocity : public Error {
 public:
  using Error::Error;
};

class NoMatchError : public Error {
 public:
  using Error::Error;
};

class AlignmentError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  ConfigError(std::string field, std::string constraint)
      : Error(field + ": " + constraint),
        field_(std::move(field)),
        constraint_(std::move(constraint)) {}
  const std::string& field() const noexcept { return field_; }
  const std::string& constraint() const noexcept { return constraint_; }

 private:
  std::string field_;
  std::string constraint_;
};

}  // namespace qhj
