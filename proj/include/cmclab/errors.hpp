#pragma once

#include <stdexcept>
#include <string>

namespace cmclab {

// Caller passed inconsistent or malformed input (grid mismatch, bad config key, ...).
class UsageError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Input lies outside the mathematical domain of an operation (unstable cone, nonpositive sample).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Capacity quantization would overflow 64-bit arithmetic.
class ScaledArithmeticError : public std::overflow_error {
public:
    using std::overflow_error::overflow_error;
};

// ODE shooting failed: step underflow, axis hit or cone crossing.
class IntegrationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A documented precondition of an experiment does not hold.
class PreconditionError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

// A hard invariant was violated at run time. Indicates a bug, never a result.
class InvariantError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

} // namespace cmclab
