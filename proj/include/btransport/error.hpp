#pragma once

#include <stdexcept>
#include <string>

namespace btransport {

/// Input violates an operation's precondition (bad parameters, infeasible
/// measures, mismatched meshes).
class PreconditionError : public std::invalid_argument {
public:
    explicit PreconditionError(const std::string& what) : std::invalid_argument(what) {}
};

/// Quadrature or another numerical routine missed its tolerance.
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

/// An internal invariant broke during a computation.
class ConsistencyError : public std::logic_error {
public:
    explicit ConsistencyError(const std::string& what) : std::logic_error(what) {}
};

/// The transport iteration ran out of steps.
class NonTerminationError : public std::runtime_error {
public:
    explicit NonTerminationError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace btransport
