#pragma once

#include <stdexcept>
#include <string>

namespace cnpgap {

/// Raised when a value lies outside the mathematical domain of an operation
/// (non-positive std, perturbation too large for the quadratic expansion, ...).
class DomainError : public std::domain_error {
public:
    explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

/// A representation was requested for a context with no points.
class EmptyContextError : public DomainError {
public:
    EmptyContextError() : DomainError("EmptyContext: context set has no points (n >= 1 required)") {}
};

/// A power-law fit had fewer usable points than it needs.
class InsufficientDataError : public DomainError {
public:
    explicit InsufficientDataError(const std::string& what) : DomainError("InsufficientData: " + what) {}
};

/// Malformed or inconsistent configuration. `field()` names the offending key.
class ConfigError : public std::invalid_argument {
public:
    ConfigError(std::string field, const std::string& what)
        : std::invalid_argument(field + ": " + what), field_(std::move(field)) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

}  // namespace cnpgap
