#pragma once

#include <limits>
#include <stdexcept>
#include <string>

namespace desopf {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// Raised when input data breaks a documented schema or invariant.
class InvalidInput : public std::runtime_error {
public:
    explicit InvalidInput(const std::string& what) : std::runtime_error(what) {}
};

/// Raised when a model is structurally unusable (disconnected network,
/// mismatched building sets, undeclared variables).
class StructuralError : public std::runtime_error {
public:
    explicit StructuralError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace desopf
