#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace netscale {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed edge-list input. `line()` is 1-based; 0 when not tied to a line.
class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& what)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// A generator or estimator was handed parameters outside its domain.
class ParameterError : public Error {
public:
    using Error::Error;
};

class InsufficientDataError : public Error {
public:
    using Error::Error;
};

/// All usable points share the same n, so the regression slope is undefined.
class DegenerateDesignError : public Error {
public:
    using Error::Error;
};

class ChecksumError : public Error {
public:
    using Error::Error;
};

class ManifestError : public Error {
public:
    using Error::Error;
};

}  // namespace netscale
