#include "steerlab/errors.hpp"

namespace steerlab {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::InvalidDimension: return "invalid-dimension";
    case ErrorCode::Shape: return "shape";
    case ErrorCode::InvalidTransform: return "invalid-transform";
    case ErrorCode::InvalidParameter: return "invalid-parameter";
    case ErrorCode::ConstructionFailed: return "construction-failed";
    case ErrorCode::Unsupported: return "unsupported";
    case ErrorCode::DegenerateVariance: return "degenerate-variance";
    case ErrorCode::ChainRepair: return "chain-repair";
    case ErrorCode::Configuration: return "configuration";
    case ErrorCode::Parse: return "parse";
    }
    return "unknown";
}

} // namespace steerlab
