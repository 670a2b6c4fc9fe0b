#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace lpblocks {

// Invalid argument to a mathematical operation (empty input, bad parameter).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Series too short for the requested block length.
class TooFewBlocksError : public DomainError {
 public:
  using DomainError::DomainError;
};

// Estimator preconditions (p > alpha for psi-estimators, h >= b, ...).
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A user-supplied cluster functional broke its vanishing contract.
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class ThresholdTooHighError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : std::runtime_error(line == 0 ? what : "line " + std::to_string(line) + ": " + what),
        line_(line) {}

  // 1-based; 0 when the error is not tied to a line.
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace lpblocks
