#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace jamids {

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Named sub-streams fanned out from the single user seed.
enum class Stream : std::uint64_t {
    Split = 1,
    MlpInit = 2,
    MlpTrain = 3,
    SvmSubsample = 4,
    SvmSolver = 5,
    Simulation = 6,
    Validation = 7,
};

// Child seed = splitmix64(seed XOR splitmix64(stream id)).
constexpr std::uint64_t derive_seed(std::uint64_t seed, Stream s) noexcept {
    return splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(s)));
}

// Stateless counter-based draw in [0, 1) keyed by up to four integers.
inline double hashed_uniform(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0,
                             std::uint64_t c = 0, std::uint64_t d = 0) noexcept {
    std::uint64_t h = splitmix64(seed ^ splitmix64(a));
    h = splitmix64(h ^ b);
    h = splitmix64(h ^ (c * 0x632be59bd9b4e019ULL));
    h = splitmix64(h ^ (d * 0x8cb92ba72f3d8dd7ULL));
    return static_cast<double>(h >> 11) * 0x1.0p-53;
}

// mt19937_64 with hand-rolled draws: the std distributions are implementation
// defined, and the outputs here must match bit for bit across toolchains.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Unbiased integer in [0, n).
    std::uint64_t below(std::uint64_t n) {
        const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
        std::uint64_t v;
        do {
            v = engine_();
        } while (v >= limit);
        return v % n;
    }

    double normal() {
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }

    double exponential(double mean) {
        double u = uniform();
        while (u <= 0.0) u = uniform();
        return -mean * std::log(u);
    }

    template <typename It>
    void shuffle(It first, It last) {
        const auto n = static_cast<std::uint64_t>(last - first);
        for (std::uint64_t i = n; i > 1; --i) {
            const auto j = below(i);
            std::iter_swap(first + (i - 1), first + j);
        }
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace jamids
