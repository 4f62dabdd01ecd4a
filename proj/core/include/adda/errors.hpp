#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace adda {

// Dimension or length mismatch between operands.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Input outside the domain of an operation (empty vector, accuracy > 1, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Invalid hyperparameter or operation argument.
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Vector with (near) zero norm handed to l2 normalization.
class DegenerateEmbeddingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// NaN/Inf appeared in a loss, gradient, or oracle evaluation.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Sub-batch plan cannot satisfy the minimum size constraint.
class InfeasiblePlanError : public ParameterError {
 public:
  using ParameterError::ParameterError;
};

// Bad configuration key/value or checkpoint/dataset mismatch.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed binary file. Carries the byte offset where decoding failed.
class FormatError : public std::runtime_error {
 public:
  FormatError(const std::string& what, std::uint64_t offset)
      : std::runtime_error(what + " (at byte offset " + std::to_string(offset) + ")"),
        offset_(offset) {}

  std::uint64_t offset() const noexcept { return offset_; }

 private:
  std::uint64_t offset_;
};

}  // namespace adda
