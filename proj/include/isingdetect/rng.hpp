#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace isingdetect {

/// One round of the SplitMix64 output function; advances `state`.
std::uint64_t splitmix64(std::uint64_t& state);

/// Order-sensitive hash of a tuple of integers, used to derive stream seeds.
std::uint64_t mix_seed(std::initializer_list<std::uint64_t> parts);

/// Random stream used by every sampler.
///
/// Wraps std::mt19937_64 (whose output sequence is fixed by the standard) and
/// converts raw words to doubles itself, so draws are identical across
/// standard library implementations.
class Rng {
public:
    using result_type = std::uint64_t;

    explicit Rng(std::uint64_t seed);

    static constexpr result_type min() { return std::mt19937_64::min(); }
    static constexpr result_type max() { return std::mt19937_64::max(); }
    result_type operator()() { return engine_(); }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform();

    /// Uniform integer in [0, bound). `bound` must be positive.
    std::uint64_t below(std::uint64_t bound);

    /// Returns +1 with probability `p_up`, else -1.
    int spin(double p_up) { return uniform() < p_up ? 1 : -1; }

private:
    std::mt19937_64 engine_;
};

/// Independent stream for replicate `replicate` of grid cell `cell`.
Rng stream_rng(std::uint64_t master_seed, std::uint64_t cell, std::uint64_t replicate);

}  // namespace isingdetect
