#include "latmove/beta_estimation.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <unordered_set>

#include "latmove/errors.hpp"

namespace latmove {

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> cells;
    std::size_t pos = 0;
    while (true) {
        const auto comma = line.find(',', pos);
        cells.push_back(trim(std::string_view(line).substr(pos, comma - pos)));
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    return cells;
}

}  // namespace

std::vector<AuthEvent> read_auth_log(std::istream& in) {
    std::string line;
    std::size_t line_no = 0;
    bool header_seen = false;
    std::vector<AuthEvent> events;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto cells = split(line);
        if (!header_seen) {
            if (cells != std::vector<std::string>{"time", "source", "destination"}) {
                throw Error(ErrorCode::ParseError, "auth log line 1: expected header time,source,destination");
            }
            header_seen = true;
            continue;
        }
        const std::string where = "auth log line " + std::to_string(line_no);
        if (cells.size() != 3) throw Error(ErrorCode::ParseError, where + ": expected 3 fields");
        AuthEvent ev;
        const std::string& t = cells[0];
        const auto res = std::from_chars(t.data(), t.data() + t.size(), ev.time);
        if (res.ec != std::errc() || res.ptr != t.data() + t.size() || !std::isfinite(ev.time)) {
            throw Error(ErrorCode::ParseError, where + ": bad time '" + t + "'");
        }
        if (cells[1].empty() || cells[2].empty()) throw Error(ErrorCode::ParseError, where + ": empty entity id");
        ev.source = cells[1];
        ev.destination = cells[2];
        events.push_back(std::move(ev));
    }
    if (!header_seen) throw Error(ErrorCode::EmptyLog, "auth log has no header");
    return events;
}

BetaEstimate estimate_beta(const std::vector<AuthEvent>& events, double window_seconds,
                           const std::map<std::string, NodeIndex>& node_map, std::optional<TimeSpan> span) {
    if (!(window_seconds > 0.0) || !std::isfinite(window_seconds)) {
        throw Error(ErrorCode::NonPositiveWindow, "window_seconds must be > 0");
    }
    if (events.empty()) throw Error(ErrorCode::EmptyLog, "no authentication events");
    if (span && !(span->end > span->start)) throw Error(ErrorCode::InvalidArgument, "span end must exceed start");

    std::size_t n = 0;
    for (const auto& [id, idx] : node_map) n = std::max(n, idx + 1);

    BetaEstimate est;
    est.window_seconds = window_seconds;
    est.beta = Matrix(n);
    est.windows_with_event = Matrix(n);

    if (span) {
        est.origin = span->start;
        est.windows = static_cast<std::uint64_t>(std::ceil((span->end - span->start) / window_seconds));
    } else {
        const auto [lo, hi] = std::minmax_element(events.begin(), events.end(),
                                                  [](const AuthEvent& a, const AuthEvent& b) { return a.time < b.time; });
        est.origin = lo->time;
        est.windows = static_cast<std::uint64_t>(std::floor((hi->time - lo->time) / window_seconds)) + 1;
    }

    // (window, i, j) triples already counted.
    std::unordered_set<std::uint64_t> seen;
    for (const AuthEvent& ev : events) {
        const auto src = node_map.find(ev.source);
        const auto dst = node_map.find(ev.destination);
        if (src == node_map.end() || dst == node_map.end()) {
            ++est.skipped_unknown;
            if (src == node_map.end()) est.unknown_ids.insert(ev.source);
            if (dst == node_map.end()) est.unknown_ids.insert(ev.destination);
            continue;
        }
        if (src->second == dst->second) {
            ++est.skipped_self;
            continue;
        }
        if (span && (ev.time < span->start || ev.time >= span->end)) {
            ++est.skipped_out_of_span;
            continue;
        }
        auto window = static_cast<std::uint64_t>(std::floor((ev.time - est.origin) / window_seconds));
        window = std::min(window, est.windows - 1);
        ++est.events_used;
        const std::uint64_t key = (window * n + src->second) * n + dst->second;
        if (seen.insert(key).second) est.windows_with_event(src->second, dst->second) += 1.0;
    }

    const double total = static_cast<double>(est.windows);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (i != j) est.beta(i, j) = est.windows_with_event(i, j) / total;
    return est;
}

}  // namespace latmove
