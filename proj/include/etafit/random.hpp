#pragma once

#include <cstdint>

namespace etafit {

// Counter-based stream built on the SplitMix64 finalizer. Value i of a stream
// depends only on (seed, stream, i), so draws can be generated in any order
// and in parallel without changing results.
//
//   key     = mix64(seed ^ (stream * 0xD1B54A32D192ED03))
//   u64(i)  = mix64(key + (i + 1) * 0x9E3779B97F4A7C15)
//   unif(i) = ((u64(i) >> 11) + 0.5) * 2^-53           in (0, 1)
//   normal(i) uses Box-Muller on unif(2i), unif(2i+1), cosine branch.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0);

    std::uint64_t bits(std::uint64_t i) const;
    double uniform(std::uint64_t i) const;
    double normal(std::uint64_t i) const;
    double rademacher(std::uint64_t i) const;

    static std::uint64_t mix64(std::uint64_t x);

private:
    std::uint64_t key_;
};

} // namespace etafit
