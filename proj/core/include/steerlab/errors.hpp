#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace steerlab {

enum class ErrorCode {
    InvalidDimension,
    Shape,
    InvalidTransform,
    InvalidParameter,
    ConstructionFailed,
    Unsupported,
    DegenerateVariance,
    ChainRepair,
    Configuration,
    Parse,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Base exception for every recoverable failure raised by the library.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

/// Raised when a constructed POVM has an effect that is not positive semidefinite.
class ConstructionFailed : public Error {
public:
    ConstructionFailed(double min_eigenvalue, const std::string& what)
        : Error(ErrorCode::ConstructionFailed, what), min_eigenvalue_(min_eigenvalue) {}

    /// Most negative eigenvalue found among the effects.
    double min_eigenvalue() const noexcept { return min_eigenvalue_; }

private:
    double min_eigenvalue_;
};

} // namespace steerlab
