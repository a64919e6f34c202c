#pragma once

#include <cstdint>

namespace ood {

/// SplitMix64 finalizer. Bijective 64-bit mixer.
[[nodiscard]] constexpr std::uint64_t splitmix64(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Derives an independent key from a parent key and a stream index.
[[nodiscard]] constexpr std::uint64_t derive_seed(std::uint64_t key, std::uint64_t stream) noexcept {
    return splitmix64(splitmix64(key) ^ splitmix64(stream + 0x632be59bd9b4e019ULL));
}

[[nodiscard]] constexpr std::uint64_t derive_seed(std::uint64_t key, std::uint64_t a, std::uint64_t b) noexcept {
    return derive_seed(derive_seed(key, a), b);
}

/**
 * Counter-based generator: the n-th output is splitmix64(key + n * golden),
 * so every draw is a pure function of (key, n). Streams are split with
 * derive_seed, which keeps parallel consumers independent of scheduling.
 *
 * Normals use the Box-Muller transform on two uniforms, so the sequence only
 * depends on this class and libm (no std::normal_distribution, whose output
 * differs between standard libraries).
 */
class Rng {
public:
    explicit Rng(std::uint64_t seed) noexcept : m_key_(splitmix64(seed)) {}

    [[nodiscard]] Rng split(std::uint64_t stream) const noexcept { return Rng(derive_seed(m_key_, stream)); }

    std::uint64_t next_u64() noexcept { return splitmix64(m_key_ + (m_counter_++) * 0x9e3779b97f4a7c15ULL); }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform on (0, 1].
    double uniform_open_left() noexcept { return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53; }

    double normal() noexcept;

    [[nodiscard]] std::uint64_t counter() const noexcept { return m_counter_; }

private:
    std::uint64_t m_key_;
    std::uint64_t m_counter_ = 0;
    double m_spare_ = 0.0;
    bool m_has_spare_ = false;
};

}  // namespace ood
