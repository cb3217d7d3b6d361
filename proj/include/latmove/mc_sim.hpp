#pragma once

// Monte-Carlo episodes of the stage dynamics documented in ltv_core.hpp.
//
// Stage k of trial t draws from two counter-based streams, (seed, StageLinks, k, t)
// for the topology and honey link and (seed, Attack, k, t) for identification and
// compromise attempts. A run to horizon K therefore replays the first K' + 1 stages
// of every shorter run exactly, which makes horizon sweeps pathwise monotone.

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "latmove/core.hpp"
#include "latmove/net_model.hpp"

namespace latmove {

enum class EpisodeStatus { Survived, Detected, TargetCompromised };

const char* to_string(EpisodeStatus status);

struct EpisodeStream {
    std::uint64_t seed = 0;
    std::uint64_t trial = 0;
};

struct EpisodeOutcome {
    EpisodeStatus status = EpisodeStatus::Survived;
    /// Stage offset of absorption, or delta_k when the attacker survived.
    std::size_t terminal_stage = 0;
    NodeSet compromised_final;
};

struct StageRecord {
    StageRealization realization;
    /// Service-link attacks from compromised nodes to clean nodes, in draw order.
    std::vector<Link> attempts;
    std::vector<NodeIndex> new_compromises;
    /// Set when the honey link's source was compromised (the attacker saw it).
    bool honey_seen = false;
    bool honey_identified = false;
    /// Idleness of the honeypot node; empty when the stage had no honey link.
    std::optional<bool> honeypot_idle;
    bool detected = false;
};

struct EpisodeTrace {
    NodeIndex initial = 0;
    std::vector<StageRecord> stages;
    EpisodeOutcome outcome;
};

EpisodeOutcome simulate_episode(const NetworkSpec& spec, const PolicyMatrix& policy, std::size_t delta_k,
                                NodeIndex initial, EpisodeStream stream);

EpisodeTrace trace_episode(const NetworkSpec& spec, const PolicyMatrix& policy, std::size_t delta_k,
                           NodeIndex initial, EpisodeStream stream);

/// Initial node of trial `trial`, drawn from rho.
NodeIndex draw_initial_node(const NetworkSpec& spec, std::uint64_t seed, std::uint64_t trial);

struct Interval {
    double lower = 0.0;
    double upper = 0.0;
};

/// Wilson score interval for `successes` out of `trials` at confidence `level`.
Interval wilson_interval(std::uint64_t successes, std::uint64_t trials, double level);

struct Proportion {
    std::uint64_t trials = 0;
    std::uint64_t successes = 0;
    double estimate = 0.0;
    Interval ci;
};

struct LtvEstimate {
    std::size_t delta_k = 0;
    double level = 0.95;
    std::uint64_t seed = 0;
    /// Target compromised within stages 0..delta_k.
    Proportion overall;
    /// horizon[d]: target compromised within stages 0..d (shared episodes).
    std::vector<Proportion> horizon;
    std::map<NodeIndex, Proportion> per_initial;
    double detection_rate = 0.0;
    /// Mean stage offset of detection; empty when nothing was detected.
    std::optional<double> mean_detection_stage;
};

struct EstimateOptions {
    std::size_t threads = 0;  ///< 0 = hardware concurrency
};

LtvEstimate estimate_ltv(const NetworkSpec& spec, const PolicyMatrix& policy, std::size_t delta_k,
                         std::uint64_t trials, std::uint64_t seed, double level = 0.95,
                         const EstimateOptions& options = {});

}  // namespace latmove
