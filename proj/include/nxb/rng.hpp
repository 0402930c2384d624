#pragma once

#include <cstdint>

namespace nxb {

// SplitMix64 finalizer. Full-period mixer, passes BigCrush as a counter hash.
constexpr std::uint64_t mix64(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xbf58476d1ce4e5b9ULL;
    z ^= z >> 27;
    z *= 0x94d049bb133111ebULL;
    z ^= z >> 31;
    return z;
}

// Counter-based generator: output n of stream (seed, id) is
// mix64(start(seed, id) + n * PHI). Streams are cheap to create and
// independent by construction, so parallel consumers each own one.
class Rng {
public:
    explicit Rng(std::uint64_t seed, std::uint64_t stream = 0)
        : state_(mix64(mix64(seed + 0x9e3779b97f4a7c15ULL) ^
                       (0xd2b74407b1ce6e93ULL * (stream + 1)))) {}

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ULL;
        return mix64(state_);
    }

    // Uniform in [0, 1), 53-bit resolution.
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform in [lo, hi).
    double next_double(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    // Uniform integer in [0, n). Rejection keeps it unbiased.
    std::uint64_t next_below(std::uint64_t n) {
        const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
        std::uint64_t v = next_u64();
        while (v >= limit) v = next_u64();
        return v % n;
    }

    // Independent child stream; deterministic in (current state, id).
    Rng split(std::uint64_t id) const { return Rng(mix64(state_), id); }

private:
    std::uint64_t state_;
};

}  // namespace nxb
