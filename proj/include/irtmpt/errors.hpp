#pragma once

#include <stdexcept>
#include <string>

namespace irtmpt {

/// Input outside the mathematical domain of an operation (probabilities
/// outside [0,1], non-finite coordinates, bad dimensions).
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A graph that violates the process-tree structure (cycles, dangling nodes).
class StructuralError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// A transformed probability left the open unit interval.
class RangeViolation : public std::domain_error {
 public:
  RangeViolation(std::string entry, double value, std::string bound)
      : std::domain_error(entry + " = " + std::to_string(value) + " violates " + bound),
        entry_(std::move(entry)),
        value_(value),
        bound_(std::move(bound)) {}

  const std::string& entry() const { return entry_; }
  double value() const { return value_; }
  const std::string& bound() const { return bound_; }

 private:
  std::string entry_;
  double value_;
  std::string bound_;
};

/// The constructive generator could not find admissible draws.
class GenerationFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A self-check that must hold by construction did not.
class InternalInvariantError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Malformed input file; the message carries path and field context.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace irtmpt
