#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace itmdp {

// Random streams for simulation.
//
// Every trajectory owns a std::mt19937_64 whose seed is derived from the
// (run seed, stream index) pair by two rounds of the SplitMix64 finalizer.
// Uniform variates are built from the top 53 bits of one engine output, so a
// given (seed, index) produces the same doubles with any standard library.

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
    return splitmix64(splitmix64(seed) ^ splitmix64(stream + 0x632be59bd9b4e019ULL));
}

class Stream {
public:
    Stream(std::uint64_t seed, std::uint64_t stream) : engine_(stream_seed(seed, stream)) {}

    /// Uniform on [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Exponential with the given mean.
    double exponential(double mean) { return -mean * std::log1p(-uniform()); }

private:
    std::mt19937_64 engine_;
};

}  // namespace itmdp
