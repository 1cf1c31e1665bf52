#pragma once

#include <stdexcept>
#include <string>

namespace toricq {

/// Root of the library's exception hierarchy.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An input violates a documented precondition (e.g. a non-convex potential).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// A parameter lies outside the domain of an operation (e.g. t outside [0,1]).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Two objects that must agree (spec, convention tag, frame) do not.
class ContractError : public Error {
 public:
  using Error::Error;
};

/// An iterative or quadrature procedure did not produce a trustworthy value.
class NumericalFailure : public Error {
 public:
  using Error::Error;
};

/// Exponent spread exceeds what double precision can represent after scaling.
class OverflowError : public NumericalFailure {
 public:
  using NumericalFailure::NumericalFailure;
};

/// A curvature certificate failed; carries the smallest parameter that passes.
class PositivityError : public Error {
 public:
  PositivityError(const std::string& what, double suggested)
      : Error(what), suggested_(suggested) {}
  double suggested() const noexcept { return suggested_; }

 private:
  double suggested_;
};

/// Malformed or inconsistent experiment configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace toricq
