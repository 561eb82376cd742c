#pragma once

#include <stdexcept>
#include <string>

namespace pzsim {

// Base class for everything thrown by this library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Bad argument or violated precondition.
class ArgumentError : public Error {
public:
    using Error::Error;
};

// Two inputs that must differ are identical (e.g. equal tip masses).
class DegenerateInputError : public ArgumentError {
public:
    using ArgumentError::ArgumentError;
};

// The requested solve has no physical solution (m_eff <= 0, k <= 0, ...).
class InfeasibleError : public Error {
public:
    using Error::Error;
};

// Configuration text could not be parsed or violates an invariant.
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what, int line = 0)
        : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
          line_(line) {}
    int line() const { return line_; }

private:
    int line_ = 0;
};

// Malformed data file (CSV schema, non-numeric cell, ...).
class FormatError : public Error {
public:
    explicit FormatError(const std::string& what, int row = 0)
        : Error(row > 0 ? "row " + std::to_string(row) + ": " + what : what),
          row_(row) {}
    int row() const { return row_; }

private:
    int row_ = 0;
};

// Numerical failure (non-convergence, singular system).
class NumericError : public Error {
public:
    using Error::Error;
};

} // namespace pzsim
