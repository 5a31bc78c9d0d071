#pragma once

#include <stdexcept>
#include <string>

namespace rbp {

// Bad model parameters (beta <= 0, xi <= 0 for Weibull/Gamma, ...).
struct ParameterError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Argument outside the domain of an operation (p not in (0,1), n too small).
struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

// Root finder or quadrature failed to converge.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// q-hat left the solvable range of the quotient curve.
struct BreakdownSignal : std::runtime_error {
  enum class Direction { Explosion, Implosion };
  Direction direction;
  BreakdownSignal(Direction d, const std::string& what)
      : std::runtime_error(what), direction(d) {}
};

}  // namespace rbp
