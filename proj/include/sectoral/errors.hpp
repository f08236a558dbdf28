#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sectoral {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Parameters sit on a classification boundary (k1 = 0, k2 = 0 or alpha = 1).
class BoundaryError : public Error {
public:
    using Error::Error;
};

/// Argument outside the mathematical domain of an operation (e.g. log of a non-positive value).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Degenerate input: zero variance, vanishing rate, too few points.
class DegenerateError : public Error {
public:
    using Error::Error;
};

class InvalidConfigError : public Error {
public:
    using Error::Error;
};

class InsufficientDataError : public Error {
public:
    using Error::Error;
};

class IneligibleSeriesError : public Error {
public:
    using Error::Error;
};

class NoBracketError : public Error {
public:
    using Error::Error;
};

class UnknownYearError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

/// Malformed input file. Row and column are 1-based; zero means "not applicable".
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t row = 0, std::size_t column = 0)
        : Error(what), row_(row), column_(column) {}

    std::size_t row() const noexcept { return row_; }
    std::size_t column() const noexcept { return column_; }

private:
    std::size_t row_;
    std::size_t column_;
};

} // namespace sectoral
