#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace apdsim {

/// Deterministic random source used by every simulation routine.
///
/// The engine is std::mt19937_64 but all variate transforms are done here
/// rather than through std::*_distribution, whose output is not pinned by
/// the standard. Same seed, same draw sequence, any platform.
class SimRng {
public:
    explicit SimRng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t raw() { return eng_(); }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() {
        return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
    }

    /// Exponential waiting time; rate must be positive.
    double exponential(double rate) {
        // -log1p(-u) keeps precision near u = 0 and never hits log(0).
        return -std::log1p(-uniform()) / rate;
    }

    /// Gaussian via Box-Muller; the spare deviate is cached.
    double gaussian(double mean, double sd) {
        if (have_spare_) {
            have_spare_ = false;
            return mean + sd * spare_;
        }
        double u1 = uniform();
        double u2 = uniform();
        while (u1 == 0.0) u1 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return mean + sd * (r * std::cos(a));
    }

    bool bernoulli(double p) { return uniform() < p; }

private:
    std::mt19937_64 eng_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

/// Mixes a base seed with stream indices so that parallel or per-point
/// sub-simulations get decorrelated, reproducible seeds. splitmix64 finalizer.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0) {
    std::uint64_t z = base + 0x9e3779b97f4a7c15ull * (a + 1) + 0xbf58476d1ce4e5b9ull * (b + 1);
    z ^= z >> 30;
    z *= 0xbf58476d1ce4e5b9ull;
    z ^= z >> 27;
    z *= 0x94d049bb133111ebull;
    z ^= z >> 31;
    return z;
}

} // namespace apdsim
