#pragma once

#include <cstdint>
#include <random>

namespace itrack {

using Engine = std::mt19937_64;

/// Every random draw in the library comes from an engine derived from one
/// experiment seed plus a stream id, so that independent consumers (parameter
/// initialisation, Gumbel noise, toy data) never share state and any single
/// stream can be replayed on its own.
enum class Stream : std::uint64_t {
    SelectorInit = 1,
    Gumbel = 2,
    ToyBase = 3,
    ToyDuplicates = 4,
    ToyNoise = 5,
    Market = 6,
    Instance = 7,
};

/// SplitMix64 finaliser; used only to decorrelate (seed, stream) pairs.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline Engine make_engine(std::uint64_t seed, std::uint64_t stream) {
    const std::uint64_t a = mix64(seed);
    const std::uint64_t b = mix64(a ^ mix64(stream));
    std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                      static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
    return Engine(seq);
}

inline Engine make_engine(std::uint64_t seed, Stream stream) {
    return make_engine(seed, static_cast<std::uint64_t>(stream));
}

/// Uniform draw on the open interval (0, 1).
inline double uniform_open(Engine& rng) {
    // 53 random mantissa bits, offset by half an ulp so neither endpoint occurs.
    return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace itrack
