#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace ibo {

/// Seedable, splittable pseudo-random generator (xoshiro256** seeded through
/// splitmix64). Output is identical on every platform, which keeps simulated
/// datasets and CLI outputs byte-identical across machines.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) : seed_(seed) {
        std::uint64_t s = seed;
        for (auto& word : state_) word = splitmix64(s);
    }

    /// Independent child stream; `split(i)` is a pure function of (seed, i).
    Rng split(std::uint64_t stream) const {
        std::uint64_t s = seed_ ^ (0x9E3779B97F4A7C15ULL * (stream + 1));
        return Rng(splitmix64(s));
    }

    std::uint64_t seed() const noexcept { return seed_; }

    std::uint64_t next() noexcept {
        const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    /// Uniform on [0, 1).
    double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// Uniform on [lo, hi).
    double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

    /// Uniform integer on the closed range [lo, hi].
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) noexcept {
        const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % span;
        std::uint64_t draw = next();
        while (draw >= limit) draw = next();
        return lo + static_cast<std::int64_t>(draw % span);
    }

    bool bernoulli(double p) noexcept { return uniform() < p; }

    /// Uniform angle on (-pi, pi].
    double angle() noexcept { return std::numbers::pi - 2.0 * std::numbers::pi * uniform(); }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) noexcept { return (x << k) | (x >> (64 - k)); }

    static std::uint64_t splitmix64(std::uint64_t& x) noexcept {
        std::uint64_t z = (x += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    std::uint64_t seed_;
    std::uint64_t state_[4]{};
};

}  // namespace ibo
