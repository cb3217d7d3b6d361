#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace latmove {

enum class ErrorCode {
    NonSquareMatrix,
    ProbabilityOutOfRange,
    RhoNotNormalized,
    TargetInDmz,
    EmptyDmz,
    NonZeroDiagonal,
    RhoOutsideDmz,
    UnknownNode,
    DuplicateNode,
    TooManyNodes,
    PolicyNotNormalized,
    InfeasibleHoneyLink,
    IndexOutOfRange,
    HoneypotInSourceOrSinkSet,
    OverlappingSets,
    SetContainsIorJ0,
    InitialNodeNotInDmz,
    NetworkTooLargeForExact,
    NetworkTooLargeForBounds,
    MissingInitialNode,
    EmptyFeasibleSet,
    DidNotConverge,
    InvalidHoneypotNode,
    EmptyLog,
    NonPositiveWindow,
    InvalidArgument,
    ParseError,
    IoError,
};

std::string_view to_string(ErrorCode code);

/// Base exception for every failure raised by the library.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

struct Violation {
    ErrorCode code;
    std::string message;
};

/// Raised by input validation; carries every violation found, not just the first.
class ValidationError : public Error {
public:
    explicit ValidationError(std::vector<Violation> violations);

    const std::vector<Violation>& violations() const noexcept { return violations_; }
    bool has(ErrorCode code) const noexcept;

private:
    std::vector<Violation> violations_;
};

}  // namespace latmove
