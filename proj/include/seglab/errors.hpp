#pragma once

#include <stdexcept>
#include <string>

namespace seglab {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Grid spacing incompatible with the requested domain.
class SizingError : public Error {
public:
    using Error::Error;
};

/// A precondition on an argument was violated.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// A diagnostic's hypotheses do not hold for the given input.
class HypothesisError : public Error {
public:
    using Error::Error;
};

/// Malformed run configuration. `line` is 1-based, 0 when not tied to a line.
class ConfigError : public Error {
public:
    ConfigError(const std::string& msg, int line = 0)
        : Error(line > 0 ? "line " + std::to_string(line) + ": " + msg : msg), line_(line) {}
    int line() const noexcept { return line_; }

private:
    int line_;
};

} // namespace seglab
