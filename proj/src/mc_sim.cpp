#include "latmove/mc_sim.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include <boost/math/distributions/normal.hpp>

#include "latmove/errors.hpp"
#include "latmove/rng.hpp"

namespace latmove {

const char* to_string(EpisodeStatus status) {
    switch (status) {
        case EpisodeStatus::Survived: return "Survived";
        case EpisodeStatus::Detected: return "Detected";
        case EpisodeStatus::TargetCompromised: return "TargetCompromised";
    }
    return "Unknown";
}

namespace {

void require_initial(const NetworkSpec& spec, NodeIndex initial) {
    if (initial >= spec.node_count() || !spec.dmz().contains(initial)) {
        throw Error(ErrorCode::InitialNodeNotInDmz, "node " + std::to_string(initial) + " is not in the dmz");
    }
}

/// Plays one episode; `trace` may be null.
EpisodeOutcome play(const NetworkSpec& spec, const PolicyMatrix& policy, std::size_t delta_k, NodeIndex initial,
                    EpisodeStream stream, EpisodeTrace* trace) {
    const NodeIndex j0 = spec.target();
    NodeSet compromised = NodeSet::single(initial);
    if (trace) trace->initial = initial;

    for (std::size_t k = 0; k <= delta_k; ++k) {
        RandomStream topology({stream.seed, StreamPurpose::StageLinks, k, stream.trial});
        RandomStream attack({stream.seed, StreamPurpose::Attack, k, stream.trial});
        StageRealization stage = sample_stage(spec, policy, topology, k);
        StageRecord record;

        bool detected = false;
        if (stage.honey_link) {
            const Link h = *stage.honey_link;
            const bool idle = is_idle(stage, h.sink);
            record.honeypot_idle = idle;
            if (compromised.contains(h.source)) {
                record.honey_seen = true;
                record.honey_identified = attack.bernoulli(spec.q(h.source, h.sink));
                detected = idle && !record.honey_identified;
            }
        }

        NodeSet fresh;
        if (!detected) {
            compromised.for_each([&](NodeIndex a) {
                stage.out_links[a].for_each([&](NodeIndex h) {
                    if (compromised.contains(h)) return;
                    if (trace) record.attempts.push_back({a, h});
                    if (attack.bernoulli(spec.lambda(a, h))) fresh.insert(h);
                });
            });
        }
        record.detected = detected;
        record.new_compromises = fresh.members();
        if (trace) {
            record.realization = std::move(stage);
            trace->stages.push_back(std::move(record));
        }

        if (detected) return {EpisodeStatus::Detected, k, compromised};
        compromised = compromised | fresh;
        if (fresh.contains(j0)) return {EpisodeStatus::TargetCompromised, k, compromised};
    }
    return {EpisodeStatus::Survived, delta_k, compromised};
}

struct Tally {
    std::vector<std::uint64_t> first_hit;  // first_hit[d]: target compromised exactly at stage d
    std::map<NodeIndex, std::pair<std::uint64_t, std::uint64_t>> per_initial;  // trials, successes
    std::uint64_t detections = 0;
    std::uint64_t detection_stage_sum = 0;

    void merge(const Tally& o) {
        for (std::size_t d = 0; d < first_hit.size(); ++d) first_hit[d] += o.first_hit[d];
        for (const auto& [i, c] : o.per_initial) {
            per_initial[i].first += c.first;
            per_initial[i].second += c.second;
        }
        detections += o.detections;
        detection_stage_sum += o.detection_stage_sum;
    }
};

Proportion make_proportion(std::uint64_t successes, std::uint64_t trials, double level) {
    Proportion p;
    p.trials = trials;
    p.successes = successes;
    p.estimate = trials == 0 ? 0.0 : static_cast<double>(successes) / static_cast<double>(trials);
    p.ci = wilson_interval(successes, trials, level);
    return p;
}

}  // namespace

EpisodeOutcome simulate_episode(const NetworkSpec& spec, const PolicyMatrix& policy, std::size_t delta_k,
                                NodeIndex initial, EpisodeStream stream) {
    require_initial(spec, initial);
    return play(spec, policy, delta_k, initial, stream, nullptr);
}

EpisodeTrace trace_episode(const NetworkSpec& spec, const PolicyMatrix& policy, std::size_t delta_k,
                           NodeIndex initial, EpisodeStream stream) {
    require_initial(spec, initial);
    EpisodeTrace trace;
    trace.outcome = play(spec, policy, delta_k, initial, stream, &trace);
    return trace;
}

NodeIndex draw_initial_node(const NetworkSpec& spec, std::uint64_t seed, std::uint64_t trial) {
    RandomStream s({seed, StreamPurpose::Initial, 0, trial});
    return s.categorical(spec.rho());
}

Interval wilson_interval(std::uint64_t successes, std::uint64_t trials, double level) {
    if (!(level > 0.0 && level < 1.0)) throw Error(ErrorCode::InvalidArgument, "level must lie in (0, 1)");
    if (successes > trials) throw Error(ErrorCode::InvalidArgument, "successes exceed trials");
    if (trials == 0) return {0.0, 1.0};
    const boost::math::normal_distribution<double> normal;
    const double z = boost::math::quantile(normal, 1.0 - (1.0 - level) / 2.0);
    const double n = static_cast<double>(trials);
    const double p = static_cast<double>(successes) / n;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / n;
    const double center = (p + z2 / (2.0 * n)) / denom;
    const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
    return {std::clamp(std::min(center - half, p), 0.0, 1.0), std::clamp(std::max(center + half, p), 0.0, 1.0)};
}

LtvEstimate estimate_ltv(const NetworkSpec& spec, const PolicyMatrix& policy, std::size_t delta_k,
                         std::uint64_t trials, std::uint64_t seed, double level, const EstimateOptions& options) {
    if (trials == 0) throw Error(ErrorCode::InvalidArgument, "trials must be >= 1");
    if (!(level > 0.0 && level < 1.0)) throw Error(ErrorCode::InvalidArgument, "level must lie in (0, 1)");

    std::size_t threads = options.threads != 0 ? options.threads : std::thread::hardware_concurrency();
    threads = std::clamp<std::size_t>(threads, 1, static_cast<std::size_t>(std::min<std::uint64_t>(trials, 64)));

    std::vector<Tally> tallies(threads);
    auto work = [&](std::size_t part) {
        Tally& t = tallies[part];
        t.first_hit.assign(delta_k + 1, 0);
        const std::uint64_t begin = trials * part / threads;
        const std::uint64_t end = trials * (part + 1) / threads;
        for (std::uint64_t trial = begin; trial < end; ++trial) {
            const NodeIndex initial = draw_initial_node(spec, seed, trial);
            const EpisodeOutcome out = play(spec, policy, delta_k, initial, {seed, trial}, nullptr);
            auto& c = t.per_initial[initial];
            ++c.first;
            if (out.status == EpisodeStatus::TargetCompromised) {
                ++t.first_hit[out.terminal_stage];
                ++c.second;
            } else if (out.status == EpisodeStatus::Detected) {
                ++t.detections;
                t.detection_stage_sum += out.terminal_stage;
            }
        }
    };
    if (threads == 1) {
        work(0);
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t p = 0; p < threads; ++p) pool.emplace_back(work, p);
    }

    Tally total;
    total.first_hit.assign(delta_k + 1, 0);
    for (const auto& t : tallies) total.merge(t);

    LtvEstimate est;
    est.delta_k = delta_k;
    est.level = level;
    est.seed = seed;
    std::uint64_t cumulative = 0;
    for (std::size_t d = 0; d <= delta_k; ++d) {
        cumulative += total.first_hit[d];
        est.horizon.push_back(make_proportion(cumulative, trials, level));
    }
    est.overall = est.horizon.back();
    spec.dmz().for_each([&](NodeIndex i) {
        const auto it = total.per_initial.find(i);
        const auto c = it == total.per_initial.end() ? std::pair<std::uint64_t, std::uint64_t>{0, 0} : it->second;
        est.per_initial[i] = make_proportion(c.second, c.first, level);
    });
    est.detection_rate = static_cast<double>(total.detections) / static_cast<double>(trials);
    if (total.detections > 0) {
        est.mean_detection_stage =
            static_cast<double>(total.detection_stage_sum) / static_cast<double>(total.detections);
    }
    return est;
}

}  // namespace latmove
