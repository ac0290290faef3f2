#pragma once

#include <stdexcept>

namespace ttc {

/// Argument outside the mathematical domain of an operation (index out of
/// range, infeasible rank, zero tensor where a nonzero one is required).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Operand shapes do not agree.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A size guard was exceeded (e.g. densifying a very large tensor).
class CapacityError : public std::length_error {
 public:
  using std::length_error::length_error;
};

/// Inputs that are individually valid but inconsistent with each other,
/// e.g. a tangent space queried with weights other than the ones it was
/// built with.
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Internal numerical consistency check failed.
class ConsistencyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ttc
