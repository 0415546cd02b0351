#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace pairiv::rng {

// SplitMix64 step (Steele, Lea & Flood 2014; Vigna's fixed-increment variant).
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Stateless hash combine used to derive substream keys.
inline std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
    std::uint64_t s = a ^ (b * 0x9E3779B97F4A7C15ULL + 0x7F4A7C15ULL);
    splitmix64(s);
    return splitmix64(s);
}

// Counter-based substream: the state depends only on (seed, key), never on how
// many other streams were consumed, so per-group streams are reproducible
// under any parallel schedule.
class Stream {
public:
    explicit Stream(std::uint64_t seed) : state_(mix(seed, 0)) {}
    Stream(std::uint64_t seed, std::uint64_t key) : state_(mix(seed, key)) {}

    std::uint64_t next_u64() { return splitmix64(state_); }

    // Uniform on (0,1]; never returns 0 so it is safe under log().
    double uniform() {
        return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    }

    // Box-Muller pair of independent standard normals.
    void normal_pair(double& n1, double& n2) {
        const double u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * std::numbers::pi * u2;
        n1 = r * std::cos(theta);
        n2 = r * std::sin(theta);
    }

    // Pair with correlation rho (|rho| <= 1).
    void correlated_normal_pair(double rho, double& e1, double& e2) {
        double n1, n2;
        normal_pair(n1, n2);
        e1 = n1;
        e2 = rho * n1 + std::sqrt(std::max(0.0, 1.0 - rho * rho)) * n2;
    }

private:
    std::uint64_t state_;
};

inline double normal_cdf(double x) {
    return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

// Inverse standard normal CDF, Acklam's rational approximation refined with
// one Halley step; accurate to ~1e-15 over (0,1).
double normal_quantile(double p);

}  // namespace pairiv::rng
