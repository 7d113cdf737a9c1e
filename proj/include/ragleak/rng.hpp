#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace ragleak {

/// Deterministic RNG wrapper. All randomized operations in the toolkit draw
/// through this type so that a (seed, call sequence) pair fully determines the
/// output on every platform. std::uniform_int_distribution is avoided on
/// purpose: its mapping is implementation-defined.
class Rng {
public:
    explicit Rng(uint64_t seed) : engine_(seed) {}

    uint64_t next_u64() { return engine_(); }

    /// Uniform draw in [0, n). n must be > 0.
    uint64_t bounded(uint64_t n) {
        // Rejection sampling over the top of the 64-bit range keeps the draw
        // unbiased and reproducible.
        const uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return x % n;
    }

    /// Uniform real in [0, 1).
    double uniform01() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    /// In-place Fisher-Yates shuffle with explicit bounded draws.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) {
            size_t j = static_cast<size_t>(bounded(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace ragleak
