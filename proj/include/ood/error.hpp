#pragma once

#include <stdexcept>
#include <string>

namespace ood {

/// Base class for every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad arguments: shape mismatches, out-of-range hyperparameters, malformed files.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// A linear-algebra step failed (e.g. a kernel matrix that stays indefinite
/// after jitter escalation).
class NumericalError : public Error {
public:
    NumericalError(const std::string &what, double smallest_eigenvalue)
        : Error(what), m_smallest_eigenvalue_(smallest_eigenvalue) {}

    [[nodiscard]] double smallest_eigenvalue() const noexcept { return m_smallest_eigenvalue_; }

private:
    double m_smallest_eigenvalue_;
};

/// The sampler could not continue (non-finite Hamiltonian, bad initialization).
class SamplerError : public Error {
public:
    SamplerError(const std::string &what, int chain) : Error(what), m_chain_(chain) {}

    [[nodiscard]] int chain() const noexcept { return m_chain_; }

private:
    int m_chain_;
};

}  // namespace ood
