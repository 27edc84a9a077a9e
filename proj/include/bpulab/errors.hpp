#pragma once

#include <stdexcept>
#include <string>

namespace bpulab {

/// Input outside the mathematical domain of an operation (bad c, k <= 0, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A documented precondition was violated by the caller.
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// The loop has infinite (or too large) holonomy order, so no Planckian lift exists.
class BohrSommerfeldError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A numerical integration did not reach the requested accuracy.
class IntegrationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A flow step would leave the tubular neighbourhood of the loop.
class StepTooLargeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The half-weight vanishes somewhere, so the almost complex structure is undefined.
class VanishingHalfWeightError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The BPU vector is zero: the point lies outside the open set where the projectivized map exists.
class OutsideDomainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A least-squares basis is numerically degenerate on the sampled range.
class IllConditionedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An experiment configuration is malformed or out of range (usage error).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A report file could not be written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace bpulab
