#pragma once

// Seed-addressed random streams. Every Monte Carlo row or sampled pair gets
// its own engine derived from (seed, stream index), so results do not depend
// on evaluation order. std::mt19937_64 is fully specified by the standard and
// the normal transform below is fixed, which keeps runs bit-reproducible.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace cyscm {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    return splitmix64(splitmix64(seed) ^ splitmix64(stream + 0x632be59bd9b4e019ULL));
}

class NormalStream {
public:
    NormalStream(std::uint64_t seed, std::uint64_t stream) : engine_(derive_seed(seed, stream)) {}

    // Uniform on (0, 1].
    double uniform() {
        return (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53;
    }

    // Box-Muller; the second variate of each pair is cached.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = uniform();
        const double u2 = uniform();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        spare_ = radius * std::sin(angle);
        has_spare_ = true;
        return radius * std::cos(angle);
    }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace cyscm
