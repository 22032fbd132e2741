#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <vector>

namespace rffi {

// Deterministic random stream. All draws are implemented on top of the raw
// 64-bit output of mt19937_64 so that sequences are identical across
// standard library implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t bits() { return gen_(); }

    // Uniform in [0, 1) with 53 bits of resolution.
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Standard normal via Box-Muller; pairs are cached.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * M_PI * uniform();
        spare_ = r * std::sin(theta);
        have_spare_ = true;
        return r * std::cos(theta);
    }

    // Circular complex Gaussian with total variance sigma2 (sigma2/2 per component).
    std::complex<double> cnormal(double sigma2) {
        const double s = std::sqrt(sigma2 * 0.5);
        const double re = s * normal();
        const double im = s * normal();
        return {re, im};
    }

    // Uniform integer in [0, n).
    std::size_t index(std::size_t n) { return static_cast<std::size_t>(gen_() % n); }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::swap(v[i - 1], v[index(i)]);
        }
    }

    // Independent child stream derived from (seed material, indices).
    Rng child(std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0) const {
        std::uint64_t s = seed_material_;
        s = mix(s ^ a);
        s = mix(s ^ b);
        s = mix(s ^ c);
        return Rng(s);
    }

    static Rng seeded(std::uint64_t seed) {
        Rng r(mix(seed));
        r.seed_material_ = mix(seed ^ 0x9e3779b97f4a7c15ull);
        return r;
    }

    // splitmix64 finalizer.
    static std::uint64_t mix(std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ull;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

private:
    std::mt19937_64 gen_;
    std::uint64_t seed_material_ = 0;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

} // namespace rffi
