#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numbers>
#include <random>
#include <string_view>

namespace ecp {

// splitmix64 finalizer; used to turn seed paths into engine seeds.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

// Deterministic random stream. All library randomness flows through this
// class so that runs are reproducible bit-for-bit from (master seed, path).
// Uniform and normal variates are generated from raw engine bits directly;
// std::*_distribution is avoided because its output is not pinned by the
// standard.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    // Hierarchical derivation: each path element is mixed into the state.
    // derive(m, {a, b}) != derive(m, {b, a}).
    static std::uint64_t derive_seed(std::uint64_t master,
                                     std::initializer_list<std::uint64_t> path) {
        std::uint64_t h = splitmix64(master);
        for (std::uint64_t v : path) h = splitmix64(h ^ (v + 0x9e3779b97f4a7c15ULL));
        return h;
    }
    static Rng derive(std::uint64_t master, std::initializer_list<std::uint64_t> path) {
        return Rng(derive_seed(master, path));
    }

    std::uint64_t bits() { return engine_(); }

    // Uniform on the open interval (0,1); safe to feed into quantile
    // transforms without hitting 0 or 1.
    double uniform() {
        return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
    }

    // Standard normal via Box-Muller; the sine mate is cached.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

    double exponential() { return -std::log(uniform()); }

    // Integer in [0, n).
    std::uint64_t below(std::uint64_t n) {
        // rejection-free modulo is fine here: n is tiny relative to 2^64
        return engine_() % n;
    }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace ecp
