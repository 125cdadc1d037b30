#pragma once

// Counter-based random numbers. Every draw is a pure function of
// (seed, stream, counter), so samplers can be split across threads and still
// produce identical output for a fixed seed.

#include <cstdint>
#include <limits>

namespace ruelle {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

class CounterRng {
public:
    explicit constexpr CounterRng(std::uint64_t seed) noexcept : seed_(seed) {}

    constexpr std::uint64_t seed() const noexcept { return seed_; }

    constexpr std::uint64_t bits(std::uint64_t stream, std::uint64_t counter) const noexcept {
        return splitmix64(seed_ ^ splitmix64(splitmix64(stream) + counter));
    }

    /// Uniform in [0, 1).
    constexpr double uniform(std::uint64_t stream, std::uint64_t counter) const noexcept {
        return static_cast<double>(bits(stream, counter) >> 11) * 0x1.0p-53;
    }

    /// Uniform integer in [0, n). Lemire-style multiply-shift; bias < n / 2^64.
    std::uint64_t below(std::uint64_t n, std::uint64_t stream, std::uint64_t counter) const noexcept {
        __extension__ using u128 = unsigned __int128;
        const u128 m = static_cast<u128>(bits(stream, counter)) * n;
        return static_cast<std::uint64_t>(m >> 64);
    }

private:
    std::uint64_t seed_;
};

/// Sequential view on one stream of a CounterRng. Satisfies
/// UniformRandomBitGenerator so it can feed <random> distributions.
class RngStream {
public:
    using result_type = std::uint64_t;

    RngStream(CounterRng rng, std::uint64_t stream) noexcept : rng_(rng), stream_(stream) {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept { return rng_.bits(stream_, counter_++); }
    double uniform() noexcept { return rng_.uniform(stream_, counter_++); }
    double uniform(double a, double b) noexcept { return a + (b - a) * uniform(); }

private:
    CounterRng rng_;
    std::uint64_t stream_;
    std::uint64_t counter_ = 0;
};

}  // namespace ruelle
