#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace ietlab {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

// Deterministic stream: mt19937_64 core, hand-rolled mappings so output does
// not depend on the standard library's distribution implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed), seed_(seed) {}

    std::uint64_t seed() const { return seed_; }

    // Sub-stream i derived from the master seed; the split rule is part of
    // the reproducibility contract documented in the README.
    Rng child(std::uint64_t index) const {
        std::uint64_t s = seed_ ^ (0xD1B54A32D192ED03ull * (index + 1));
        splitmix64(s);
        return Rng(splitmix64(s));
    }

    std::uint64_t bits() { return gen_(); }

    double uniform() { // [0,1)
        return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    }

    double uniform(double a, double b) { return a + (b - a) * uniform(); }

    double exponential(double rate) {
        double u;
        do { u = uniform(); } while (u <= 0.0);
        return -std::log(u) / rate;
    }

    double laplace(double rate) {
        double u = uniform() - 0.5;
        double s = u < 0 ? -1.0 : 1.0;
        double a = 1.0 - 2.0 * std::fabs(u);
        if (a <= 0.0) a = 0x1.0p-53;
        return -s * std::log(a) / rate;
    }

    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1, u2;
        do { u1 = uniform(); } while (u1 <= 0.0);
        u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        spare_ = r * std::sin(2.0 * M_PI * u2);
        have_spare_ = true;
        return r * std::cos(2.0 * M_PI * u2);
    }

    std::size_t index(std::size_t n) { return static_cast<std::size_t>(gen_() % n); }

    // Uniform point of the open simplex (all coordinates positive, sum 1).
    std::vector<double> simplex(std::size_t d) {
        std::vector<double> v(d);
        double s = 0.0;
        for (auto& x : v) {
            x = exponential(1.0);
            s += x;
        }
        for (auto& x : v) x /= s;
        return v;
    }

private:
    std::mt19937_64 gen_;
    std::uint64_t seed_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

} // namespace ietlab
