#pragma once

#include <cstdint>

namespace latcorr {

// Counter-based uniform stream built on the SplitMix64 finalizer.
//
// Draw i of stream s is mix64(s + (i + 1) * 0x9E3779B97F4A7C15), so any
// draw can be computed without advancing state. This is the pinned
// generator behind every simulated sample; changing it changes golden
// outputs.

constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ULL;

constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Seed of replication `index` within the stream rooted at `seed`.
constexpr std::uint64_t substream(std::uint64_t seed, std::uint64_t index) noexcept {
    return seed ^ mix64(index * kGoldenGamma + 0x632BE59BD9B4E019ULL);
}

class UniformStream {
public:
    constexpr explicit UniformStream(std::uint64_t seed) noexcept : seed_(seed) {}

    constexpr std::uint64_t bits(std::uint64_t index) const noexcept {
        return mix64(seed_ + (index + 1) * kGoldenGamma);
    }

    /// Uniform on the open interval (0, 1): midpoint of a 2^-53 cell.
    constexpr double uniform(std::uint64_t index) const noexcept {
        return (static_cast<double>(bits(index) >> 11) + 0.5) * 0x1.0p-53;
    }

    constexpr std::uint64_t seed() const noexcept { return seed_; }

private:
    std::uint64_t seed_;
};

} // namespace latcorr
