#pragma once

#include <cstdint>
#include <random>

namespace msens {

// Stateless mixing step; used to derive independent streams from (seed, index)
// so parallel work is reproducible regardless of scheduling.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    return splitmix64(splitmix64(seed) ^ splitmix64(stream + 0x632BE59BD9B4E019ULL));
}

double norm_quantile(double p);  // stats.hpp

// mt19937_64 with hand-rolled variate transforms. The standard distribution
// objects are implementation-defined, so none are used; every draw below is
// bit-reproducible across compilers.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    // [0, 1), 53-bit resolution
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    // (0, 1): rejects exact zero so inverse-CDF transforms stay finite
    double uniform_pos() {
        double u = uniform();
        while (u <= 0.0) u = uniform();
        return u;
    }

    double normal() { return norm_quantile(uniform_pos()); }

    int rademacher() { return (engine_() & 1ULL) ? 1 : -1; }

    int bernoulli(double p) { return uniform() < p ? 1 : 0; }

    // unbiased integer in [0, m)
    std::uint64_t uniform_below(std::uint64_t m) {
        const std::uint64_t limit = ~std::uint64_t(0) - (~std::uint64_t(0) % m);
        std::uint64_t x = engine_();
        while (x >= limit) x = engine_();
        return x % m;
    }

  private:
    std::mt19937_64 engine_;
};

}  // namespace msens
