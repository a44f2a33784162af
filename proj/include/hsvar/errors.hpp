#pragma once

#include <stdexcept>
#include <string>

namespace hsvar {

/// Design matrix without full column rank; OLS never falls back to a
/// pseudo-inverse.
class SingularDesignError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Numerical breakdown inside a sampler (non-PD precision, underflowed
/// particle weights, exp overflow). Carries the offending time index when
/// one applies, otherwise -1.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what, long time_index = -1)
        : std::runtime_error(what), time_index_(time_index) {}
    long time_index() const { return time_index_; }

private:
    long time_index_;
};

/// Malformed input file; line is 1-based, 0 when not tied to a line.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t line)
        : std::runtime_error(what), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

} // namespace hsvar
