// Deterministic random source. All transforms (uniform doubles, bounded
// ints, shuffles) are implemented here rather than via <random>
// distributions, whose output is implementation-defined; the same seed
// therefore yields the same stream on any platform.
#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace reactsent {

inline uint64_t fnv1a64(std::string_view data, uint64_t seed = 0xCBF29CE484222325ULL) {
    uint64_t h = seed;
    for (char c : data) {
        h ^= static_cast<uint8_t>(c);
        h *= 0x100000001B3ULL;
    }
    return h;
}

class Rng {
public:
    explicit Rng(uint64_t seed) : seed_(seed), engine_(seed) {}

    uint64_t seed() const { return seed_; }

    /// Independent stream for a named purpose, so adding a consumer in one
    /// stage never shifts the draws seen by another.
    Rng fork(std::string_view tag) const {
        return Rng(fnv1a64(tag, seed_ * 0x9E3779B97F4A7C15ULL + 0x2545F4914F6CDD1DULL));
    }

    uint64_t next_u64() { return engine_(); }

    /// Uniform in [0, 1) with 53 random bits.
    double next_double() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    /// Uniform in [lo, hi).
    double next_double(double lo, double hi) {
        return lo + (hi - lo) * next_double();
    }

    /// Uniform integer in [0, bound). bound must be > 0.
    uint64_t next_below(uint64_t bound) {
        return static_cast<uint64_t>(
            (static_cast<unsigned __int128>(engine_()) * bound) >> 64);
    }

    /// Seeded Fisher-Yates.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) {
            size_t j = static_cast<size_t>(next_below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    uint64_t seed_;
    std::mt19937_64 engine_;
};

}  // namespace reactsent
