#pragma once

#include <cstdint>

namespace mtswarm {

/// SplitMix64 finalizer. Bijective 64-bit mixing.
constexpr std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

constexpr std::uint64_t hash_combine(std::uint64_t a, std::uint64_t b) {
    return mix64(a ^ mix64(b + 0x632be59bd9b4e019ULL));
}

/// Counter-based random stream.
///
/// A stream is identified by a key (seed plus any number of indices folded
/// in with `substream`). Draw k of a stream depends only on (key, k), so the
/// noise applied to a given site at a given step is independent of the order
/// in which sites or filaments are visited.
class CounterRng {
public:
    explicit constexpr CounterRng(std::uint64_t seed) : key_(mix64(seed)) {}

    /// Independent child stream keyed by `index`.
    constexpr CounterRng substream(std::uint64_t index) const {
        CounterRng child(0);
        child.key_ = hash_combine(key_, index);
        return child;
    }

    constexpr std::uint64_t next_u64() { return mix64(key_ ^ mix64(++counter_)); }

    /// Uniform double in the open interval (0, 1).
    double uniform() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    /// Uniform integer in [0, n). Uses rejection to stay unbiased.
    std::uint64_t below(std::uint64_t n);

    /// Standard normal deviate (Box-Muller, both outputs used).
    double normal();

private:
    std::uint64_t key_ = 0;
    std::uint64_t counter_ = 0;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace mtswarm
