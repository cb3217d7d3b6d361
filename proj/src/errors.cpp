#include "latmove/errors.hpp"

#include <algorithm>

namespace latmove {

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::NonSquareMatrix: return "NonSquareMatrix";
        case ErrorCode::ProbabilityOutOfRange: return "ProbabilityOutOfRange";
        case ErrorCode::RhoNotNormalized: return "RhoNotNormalized";
        case ErrorCode::TargetInDmz: return "TargetInDmz";
        case ErrorCode::EmptyDmz: return "EmptyDmz";
        case ErrorCode::NonZeroDiagonal: return "NonZeroDiagonal";
        case ErrorCode::RhoOutsideDmz: return "RhoOutsideDmz";
        case ErrorCode::UnknownNode: return "UnknownNode";
        case ErrorCode::DuplicateNode: return "DuplicateNode";
        case ErrorCode::TooManyNodes: return "TooManyNodes";
        case ErrorCode::PolicyNotNormalized: return "PolicyNotNormalized";
        case ErrorCode::InfeasibleHoneyLink: return "InfeasibleHoneyLink";
        case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
        case ErrorCode::HoneypotInSourceOrSinkSet: return "HoneypotInSourceOrSinkSet";
        case ErrorCode::OverlappingSets: return "OverlappingSets";
        case ErrorCode::SetContainsIorJ0: return "SetContainsIorJ0";
        case ErrorCode::InitialNodeNotInDmz: return "InitialNodeNotInDmz";
        case ErrorCode::NetworkTooLargeForExact: return "NetworkTooLargeForExact";
        case ErrorCode::NetworkTooLargeForBounds: return "NetworkTooLargeForBounds";
        case ErrorCode::MissingInitialNode: return "MissingInitialNode";
        case ErrorCode::EmptyFeasibleSet: return "EmptyFeasibleSet";
        case ErrorCode::DidNotConverge: return "DidNotConverge";
        case ErrorCode::InvalidHoneypotNode: return "InvalidHoneypotNode";
        case ErrorCode::EmptyLog: return "EmptyLog";
        case ErrorCode::NonPositiveWindow: return "NonPositiveWindow";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::ParseError: return "ParseError";
        case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

namespace {

std::string join_violations(const std::vector<Violation>& violations) {
    std::string out = std::to_string(violations.size()) + " violation(s)";
    for (const auto& v : violations) {
        out += "\n  - ";
        out += to_string(v.code);
        out += ": ";
        out += v.message;
    }
    return out;
}

ErrorCode first_code(const std::vector<Violation>& violations) {
    return violations.empty() ? ErrorCode::InvalidArgument : violations.front().code;
}

}  // namespace

ValidationError::ValidationError(std::vector<Violation> violations)
    : Error(first_code(violations), join_violations(violations)), violations_(std::move(violations)) {}

bool ValidationError::has(ErrorCode code) const noexcept {
    return std::any_of(violations_.begin(), violations_.end(),
                       [code](const Violation& v) { return v.code == code; });
}

}  // namespace latmove
