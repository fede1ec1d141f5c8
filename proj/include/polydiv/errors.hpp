#pragma once

#include <stdexcept>
#include <string>

namespace polydiv {

// Bad inputs: malformed files, parameter sets that fail validation,
// out-of-range requests. The CLI maps these to exit code 2.
class validation_error : public std::runtime_error {
public:
    explicit validation_error(const std::string& msg) : std::runtime_error(msg) {}
};

// A computation that started from valid inputs but could not be completed
// reliably: non-convergence, overflow, singular systems. CLI exit code 3.
class numerical_error : public std::runtime_error {
public:
    explicit numerical_error(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace polydiv
