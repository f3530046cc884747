#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>

#include "motifstore/sequence.hpp"

namespace motifstore {

inline uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Independent stream seed for (master, a, b, c), e.g. (seed, block, read, tag).
inline uint64_t derive_seed(uint64_t master, uint64_t a, uint64_t b = 0, uint64_t c = 0) {
    uint64_t h = splitmix64(master ^ 0x6a09e667f3bcc908ULL);
    h = splitmix64(h ^ a);
    h = splitmix64(h ^ b);
    h = splitmix64(h ^ c);
    return h;
}

// mt19937_64 outputs are pinned by the standard; the std:: distributions are
// not, so all sampling here is hand-rolled for byte-reproducible runs.
class Rng {
public:
    explicit Rng(uint64_t seed) : eng_(seed) {}

    uint64_t next() { return eng_(); }

    // Uniform in [0, 1), 53-bit resolution.
    double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    // Uniform integer in [0, n), rejection-sampled (unbiased).
    uint64_t below(uint64_t n) {
        if (n == 0) throw std::invalid_argument("Rng::below(0)");
        const uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        uint64_t v;
        do {
            v = next();
        } while (v >= limit);
        return v % n;
    }

    double normal(double mean, double sd) {
        // Box-Muller; two fresh uniforms per call.
        const double u1 = 1.0 - uniform01();
        const double u2 = uniform01();
        return mean + sd * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }

    // Geometric on {1, 2, ...} with the given mean (>= 1), by inversion.
    uint32_t geometric_ge1(double mean) {
        if (mean < 1.0) throw std::invalid_argument("Rng::geometric_ge1: mean < 1");
        if (mean == 1.0) return 1;
        const double p = 1.0 / mean;
        const double u = uniform01();
        const double d = 1.0 + std::floor(std::log1p(-u) / std::log1p(-p));
        if (d < 1.0) return 1;
        if (d > 1e9) return 1000000000u;
        return static_cast<uint32_t>(d);
    }

    bool bernoulli(double p) { return uniform01() < p; }

    char random_base() { return kBaseChars[below(4)]; }

    // Poisson by inversion for small means, normal approximation above 50.
    uint32_t poisson(double mean) {
        if (mean < 0) throw std::invalid_argument("Rng::poisson: negative mean");
        if (mean == 0) return 0;
        if (mean > 50.0) {
            const double v = std::round(normal(mean, std::sqrt(mean)));
            return v < 0 ? 0u : static_cast<uint32_t>(v);
        }
        const double target = uniform01();
        double p = std::exp(-mean), cdf = p;
        uint32_t k = 0;
        while (cdf < target && k < 100000) {
            ++k;
            p *= mean / k;
            cdf += p;
        }
        return k;
    }

private:
    std::mt19937_64 eng_;
};

}  // namespace motifstore
