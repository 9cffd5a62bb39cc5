// errors.hpp
// Exception types raised by the eploop library.
//
// Everything numerical derives from NumericalError so callers (and the CLI)
// can map the whole family onto a single exit status.

#pragma once

#include <stdexcept>
#include <string>

namespace eploop {

class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class SingularMatrix : public NumericalError {
public:
    explicit SingularMatrix(const std::string& what) : NumericalError("singular matrix: " + what) {}
};

class NotHermitian : public NumericalError {
public:
    explicit NotHermitian(const std::string& what) : NumericalError("matrix is not Hermitian: " + what) {}
};

class NegativeEigenvalue : public NumericalError {
public:
    explicit NegativeEigenvalue(const std::string& what) : NumericalError("negative eigenvalue: " + what) {}
};

class TooCloseToEP : public NumericalError {
public:
    explicit TooCloseToEP(const std::string& what) : NumericalError("too close to exceptional point: " + what) {}
};

class NoBracket : public NumericalError {
public:
    explicit NoBracket(const std::string& what) : NumericalError("no bracket: " + what) {}
};

class IllConditioned : public NumericalError {
public:
    explicit IllConditioned(const std::string& what) : NumericalError("ill-conditioned: " + what) {}
};

class ConventionMismatch : public NumericalError {
public:
    explicit ConventionMismatch(const std::string& what) : NumericalError("convention mismatch: " + what) {}
};

class NonFinite : public NumericalError {
public:
    explicit NonFinite(const std::string& what) : NumericalError("non-finite value: " + what) {}
};

// Input validation failures (bad density matrix, bad transmittance, ...).
class DomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Malformed or inconsistent run configuration.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

}  // namespace eploop
