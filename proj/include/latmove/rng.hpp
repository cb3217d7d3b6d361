#pragma once

// Counter-based random streams.
//
// Every draw is a pure function of (master seed, purpose, stage, trial,
// counter), so results do not depend on execution order or thread layout.
// The mixing function is the SplitMix64 finalizer, which is fully specified
// in integer arithmetic and therefore bit-reproducible across platforms.

#include <cstdint>
#include <span>

namespace latmove {

enum class StreamPurpose : std::uint64_t {
    StageLinks = 1,   ///< service links and honey link of one stage
    Attack = 2,       ///< honey-link identification and compromise attempts
    Initial = 3,      ///< initial-intrusion node draw
    Synthetic = 4,    ///< synthetic data (test instances, synthetic logs)
};

struct StreamKey {
    std::uint64_t seed = 0;
    StreamPurpose purpose = StreamPurpose::StageLinks;
    std::uint64_t stage = 0;
    std::uint64_t trial = 0;
};

constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

class RandomStream {
public:
    explicit constexpr RandomStream(StreamKey key)
        : base_(splitmix64(splitmix64(splitmix64(splitmix64(key.seed) ^
                                                 static_cast<std::uint64_t>(key.purpose)) ^
                                      key.stage) ^
                           key.trial)) {}

    constexpr std::uint64_t next_u64() {
        ++counter_;
        return splitmix64(base_ + counter_ * 0xD1B54A32D192ED03ULL);
    }

    /// Uniform double in [0, 1) with 53 random bits.
    constexpr double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// True with probability p; p <= 0 never fires and p >= 1 always fires.
    constexpr bool bernoulli(double p) { return uniform() < p; }

    /// Index drawn from the (non-negative, unnormalized) weights by inverse CDF.
    /// Falls back to the last positive weight when round-off leaves the draw past the end.
    std::size_t categorical(std::span<const double> weights);

    std::uint64_t draws() const { return counter_; }

private:
    std::uint64_t base_;
    std::uint64_t counter_ = 0;
};

}  // namespace latmove
