#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace agentcrowd {

/// Base of every exception the library throws.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid configuration or asset definition; detected before any work starts.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// A line-record file could not be parsed. Carries the 1-based line number.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line)
        : Error(what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// A caller violated an operation's precondition (sizes, ranges, emptiness).
class PreconditionError : public Error {
public:
    using Error::Error;
};

}  // namespace agentcrowd
