#ifndef DRESFL_ERRORS_HPP
#define DRESFL_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace dresfl {

// Invalid configuration (bad modulus, infeasible coding parameters, ...).
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Operation outside its mathematical domain (inverse of zero, shape mismatch, ...).
struct DomainError : std::runtime_error {
    explicit DomainError(const std::string& msg) : std::runtime_error(msg) {}
};

// A signed value does not fit in the representable range of the field.
struct CapacityError : std::runtime_error {
    explicit CapacityError(const std::string& msg) : std::runtime_error(msg) {}
};

struct IoError : std::runtime_error {
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace dresfl

#endif
