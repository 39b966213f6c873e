#pragma once

// Counter-based random numbers: value k of stream (seed, stream) is a pure
// function of (seed, stream, k), so parallel workers never change results.

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>

namespace deformlab {

inline constexpr const char* rng_algorithm = "splitmix64-counter";

constexpr std::uint64_t splitmix64_mix(std::uint64_t z)
{
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

class CounterRng {
public:
    using result_type = std::uint64_t;
    static constexpr std::uint64_t golden = 0x9e3779b97f4a7c15ULL;

    CounterRng(std::uint64_t seed, std::uint64_t stream = 0)
        : key_(splitmix64_mix(seed ^ splitmix64_mix(stream + golden)))
    {
    }

    std::uint64_t at(std::uint64_t k) const { return splitmix64_mix(key_ + (k + 1) * golden); }
    /// Uniform on [0, 1) with 53 random bits.
    double uniform_at(std::uint64_t k) const
    {
        return static_cast<double>(at(k) >> 11) * 0x1.0p-53;
    }

    // Sequential interface (UniformRandomBitGenerator).
    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
    result_type operator()() { return at(counter_++); }

    double uniform() { return uniform_at(counter_++); }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    /// Standard normal via Box-Muller, one variate per two draws.
    double normal()
    {
        const double u1 = 1.0 - uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

}  // namespace deformlab
