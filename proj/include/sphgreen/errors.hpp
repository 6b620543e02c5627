#pragma once

#include <stdexcept>
#include <string>

namespace sphgreen {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Caller supplied arguments outside an operation's domain.
class InvalidInput : public Error {
public:
  using Error::Error;
};

/// A well-posed evaluation that failed numerically.
class NumericalFailure : public Error {
public:
  using Error::Error;
};

class InvalidParams : public InvalidInput {
public:
  using InvalidInput::InvalidInput;
};

/// R/L_d <= 1/2 makes beta imaginary; the integral form and closed forms need it real.
class BetaImaginary : public InvalidParams {
public:
  using InvalidParams::InvalidParams;
};

/// The Green's function is logarithmically singular at zero separation.
class Singular : public InvalidInput {
public:
  using InvalidInput::InvalidInput;
};

class DegenerateSeparation : public Singular {
public:
  using Singular::Singular;
};

class ArgOutOfRange : public InvalidInput {
public:
  using InvalidInput::InvalidInput;
};

class DomainError : public InvalidInput {
public:
  using InvalidInput::InvalidInput;
};

class UnderResolved : public InvalidInput {
public:
  using InvalidInput::InvalidInput;
};

class DivByZero : public NumericalFailure {
public:
  using NumericalFailure::NumericalFailure;
};

class NoConvergence : public NumericalFailure {
public:
  using NumericalFailure::NumericalFailure;
};

}  // namespace sphgreen
