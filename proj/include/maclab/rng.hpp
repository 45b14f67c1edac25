#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>

namespace maclab {

// splitmix64 step; also used as the avalanche for counter-based draws.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Small deterministic generator. All randomness in the library flows through
// this class so runs are reproducible across platforms (the standard
// distributions are implementation defined).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed ^ 0xa02bdbf7bb3c0a7ULL) {
        // avoid the all-zero fixed point and decorrelate small seeds
        next_u64();
        next_u64();
    }

    std::uint64_t next_u64() { return splitmix64(state_); }

    // uniform in [0, 1) with 53 random bits
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // uniform integer in [0, n)
    std::uint64_t uniform_int(std::uint64_t n) {
        if (n == 0) throw std::invalid_argument("uniform_int: n must be positive");
        // rejection sampling to avoid modulo bias
        std::uint64_t threshold = (0 - n) % n;
        for (;;) {
            std::uint64_t r = next_u64();
            if (r >= threshold) return r % n;
        }
    }

    bool bernoulli(double p) { return uniform01() < p; }

    // index drawn from a probability vector (entries >= 0, summing to ~1)
    int categorical(std::span<const double> probs) {
        double u = uniform01();
        double acc = 0.0;
        for (std::size_t i = 0; i < probs.size(); ++i) {
            acc += probs[i];
            if (u < acc) return static_cast<int>(i);
        }
        return static_cast<int>(probs.size()) - 1;
    }

    long long binomial(long long n, double p) {
        long long k = 0;
        for (long long i = 0; i < n; ++i) k += bernoulli(p);
        return k;
    }

private:
    std::uint64_t state_;
};

// Pure counter-based draw: a function of (seed, a, b, c) only. Used by lazily
// generated loss tensors so concurrent reads need no shared state.
inline std::uint64_t counter_hash(std::uint64_t seed, std::uint64_t a, std::uint64_t b,
                                  std::uint64_t c) {
    std::uint64_t s = seed;
    s ^= 0x9e3779b97f4a7c15ULL + a;
    splitmix64(s);
    s ^= 0xc2b2ae3d27d4eb4fULL + b;
    splitmix64(s);
    s ^= 0x165667b19e3779f9ULL + c;
    return splitmix64(s);
}

inline double counter_uniform01(std::uint64_t seed, std::uint64_t a, std::uint64_t b,
                                std::uint64_t c) {
    return static_cast<double>(counter_hash(seed, a, b, c) >> 11) * 0x1.0p-53;
}

}  // namespace maclab
