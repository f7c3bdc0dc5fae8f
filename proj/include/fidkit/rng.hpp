#pragma once

#include "fidkit/numerics.hpp"

#include <array>
#include <cmath>
#include <cstdint>

namespace fidkit::rng {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// xoshiro256++ with all state derived up front; streams never overlap in
// practice because seeding hashes the full (seed, grid, replication) triple.
class Stream {
public:
    Stream(std::uint64_t a, std::uint64_t b, std::uint64_t c, std::uint64_t d)
        : s_{a, b, c, d} {}

    std::uint64_t next_u64() {
        auto rotl = [](std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); };
        std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // Strictly inside (0,1).
    double uniform() { return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53; }

    double normal() { return num::std_normal_quantile(uniform()); }

    double exponential() { return -std::log(uniform()); }

    // Marsaglia-Tsang, boosted below shape 1.
    double gamma(double shape) {
        if (shape < 1.0) {
            double u = uniform();
            return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
        }
        double d = shape - 1.0 / 3.0;
        double c = 1.0 / (3.0 * std::sqrt(d));
        for (;;) {
            double x = normal();
            double v = 1.0 + c * x;
            if (v <= 0.0) continue;
            v = v * v * v;
            double u = uniform();
            if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
            if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
        }
    }

    int binomial(int n, double p) {
        int count = 0;
        for (int i = 0; i < n; ++i) count += (uniform() < p) ? 1 : 0;
        return count;
    }

private:
    std::array<std::uint64_t, 4> s_;
};

inline std::uint64_t mix_in(std::uint64_t h, std::uint64_t v) {
    h ^= v + 0x9e3779b97f4a7c15ULL + (h << 12) + (h >> 4);
    std::uint64_t st = h;
    return splitmix64(st);
}

// Keyed-hash stream derivation; identical triples give identical streams on
// any platform and under any execution order.
inline Stream derive_stream(std::uint64_t master_seed, std::uint64_t grid_index,
                            std::uint64_t replication) {
    std::uint64_t h = mix_in(mix_in(mix_in(0x243f6a8885a308d3ULL, master_seed), grid_index),
                             replication);
    std::uint64_t st = h;
    std::uint64_t a = splitmix64(st);
    std::uint64_t b = splitmix64(st);
    std::uint64_t c = splitmix64(st);
    std::uint64_t d = splitmix64(st);
    return Stream(a, b, c, d);
}

}  // namespace fidkit::rng
