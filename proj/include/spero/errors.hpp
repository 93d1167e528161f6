#pragma once

#include <stdexcept>
#include <string>

namespace spero {

/// Raised when a state or input contains non-finite values.
class InvalidState : public std::runtime_error {
public:
    explicit InvalidState(const std::string& what) : std::runtime_error(what) {}
};

/// Raised for out-of-range parameters or malformed input files.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Raised when a closed-loop simulation leaves the finite envelope.
class DivergenceError : public std::runtime_error {
public:
    explicit DivergenceError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace spero
