#pragma once

#include <stdexcept>
#include <string>

namespace pkpart {

// Argument outside an operation's accepted range (sizes, indices, domains of
// special functions).
class BoundsError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

// Structurally invalid input: empty mass vectors, invalid compositions,
// deleting more classes than exist.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// A numerical method could not certify its result (cancellation budget,
// quadrature non-convergence, tail truncation failure).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Two routes that must agree analytically disagree beyond tolerance.
class ConsistencyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigurationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace pkpart
