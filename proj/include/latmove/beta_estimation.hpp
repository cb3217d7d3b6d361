#pragma once

// Service-link probabilities estimated from authentication events.
// Each fixed-width time window stands in for one stage.

#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "latmove/core.hpp"

namespace latmove {

struct AuthEvent {
    double time = 0.0;
    std::string source;
    std::string destination;
};

/// CSV with header `time,source,destination`. Throws ParseError naming the line.
std::vector<AuthEvent> read_auth_log(std::istream& in);

struct TimeSpan {
    double start = 0.0;
    double end = 0.0;  ///< exclusive
};

struct BetaEstimate {
    Matrix beta;
    /// windows_with_event(i, j): number of windows holding at least one i -> j event.
    Matrix windows_with_event;
    std::uint64_t windows = 0;
    double origin = 0.0;
    double window_seconds = 0.0;
    std::uint64_t events_used = 0;
    std::uint64_t skipped_unknown = 0;
    std::uint64_t skipped_self = 0;
    std::uint64_t skipped_out_of_span = 0;
    std::set<std::string> unknown_ids;
};

/// beta(i, j) = windows containing an i -> j event / total windows.
/// Without `span` the windows start at the earliest event and end with the window holding the latest one;
/// with `span` there are ceil((end - start) / window_seconds) windows and events outside are skipped.
BetaEstimate estimate_beta(const std::vector<AuthEvent>& events, double window_seconds,
                           const std::map<std::string, NodeIndex>& node_map,
                           std::optional<TimeSpan> span = std::nullopt);

}  // namespace latmove
