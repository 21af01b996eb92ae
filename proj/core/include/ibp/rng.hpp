#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string_view>

namespace ibp {

/// Deterministic random stream. Distribution code is hand-rolled on top of
/// mt19937_64 raw output so results do not depend on the standard library's
/// (implementation-defined) distribution algorithms.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t raw() { return gen_(); }

    /// Uniform in [0, 1).
    double uniform() {
        return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal via Box-Muller; draws exactly two uniforms per call.
    double normal() {
        double u1 = uniform();
        double u2 = uniform();
        if (u1 <= 0.0) u1 = 0x1.0p-53;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
    }

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    std::size_t index(std::size_t n) {
        if (n == 0) throw std::invalid_argument("Rng::index: empty range");
        return static_cast<std::size_t>(uniform() * static_cast<double>(n)) % n;
    }

    /// Samples from unnormalized nonnegative weights by inverse CDF.
    std::size_t categorical(std::span<const double> probs) {
        double total = 0.0;
        for (double p : probs) total += p;
        double u = uniform() * total;
        double acc = 0.0;
        for (std::size_t i = 0; i < probs.size(); ++i) {
            acc += probs[i];
            if (u < acc) return i;
        }
        return probs.size() - 1;
    }

private:
    std::mt19937_64 gen_;
};

namespace detail {
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}
}  // namespace detail

/// Derives an independent named sub-stream from a root seed. All randomness
/// in the project flows from one root seed through these streams so paired
/// comparisons can share e.g. the scene stream while policies differ.
inline Rng substream(std::uint64_t root, std::string_view name, std::uint64_t a = 0,
                     std::uint64_t b = 0) {
    std::uint64_t h = detail::splitmix64(root ^ detail::fnv1a(name));
    h = detail::splitmix64(h ^ a);
    h = detail::splitmix64(h ^ b);
    return Rng(h);
}

}  // namespace ibp
