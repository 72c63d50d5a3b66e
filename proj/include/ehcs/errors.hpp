#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace ehcs {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Fock cutoff too small for the requested coherent-state label.
class CutoffTooSmall : public Error {
public:
    using Error::Error;
};

/// Two states (or a state and an operator) live in different truncations.
class CutoffMismatch : public Error {
public:
    using Error::Error;
};

/// Quadrature settings cannot reach the requested accuracy.
class SpecInsufficient : public Error {
public:
    using Error::Error;
};

/// A physical parameter violates an operation precondition.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Mode-matching matrix is (numerically) singular.
class SingularMatching : public Error {
public:
    SingularMatching(const std::string& what, double condition)
        : Error(what), condition_number(condition) {}
    double condition_number;
};

/// Warnings collected by long-running operations. Passing one is optional.
struct Diagnostics {
    std::vector<std::string> warnings;

    void warn(std::string message) { warnings.push_back(std::move(message)); }
    bool empty() const { return warnings.empty(); }
};

inline void warn(Diagnostics* diag, std::string message)
{
    if (diag) diag->warn(std::move(message));
}

} // namespace ehcs
