#pragma once

// Deterministic counter-based random number generation. Every draw is a pure
// function of (stream, counter), so noise fields are reproducible regardless
// of iteration order or thread count.

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numbers>

namespace pnlm::rng {

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

// splitmix64 finalizer
inline std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Hash-combines a seed with a list of tags into a stream key. Distinct tag
// tuples yield statistically independent streams.
inline std::uint64_t derive_stream(std::uint64_t seed, std::initializer_list<std::uint64_t> tags) {
    std::uint64_t s = mix64(seed + kGolden);
    for (std::uint64_t t : tags) {
        s = mix64(s ^ (t + kGolden + (s << 6) + (s >> 2)));
    }
    return s;
}

inline std::uint64_t bits_at(std::uint64_t stream, std::uint64_t counter) {
    return mix64(stream + counter * kGolden);
}

// Uniform draw on (0, 1]; the open lower end keeps log() finite in Box-Muller.
inline double uniform_at(std::uint64_t stream, std::uint64_t counter) {
    return static_cast<double>((bits_at(stream, counter) >> 11) + 1) * 0x1.0p-53;
}

// Standard normal at a counter via Box-Muller (cosine branch).
inline double gaussian_at(std::uint64_t stream, std::uint64_t counter) {
    const double u1 = uniform_at(stream, 2 * counter);
    const double u2 = uniform_at(stream, 2 * counter + 1);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

// Sequential splitmix64 generator for bulk sampling inside one seed-derived
// block. Uses both Box-Muller branches.
class GaussianStream {
public:
    explicit GaussianStream(std::uint64_t stream) : state_(stream) {}

    double next() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        state_ += kGolden;
        const double u1 = static_cast<double>((mix64(state_) >> 11) + 1) * 0x1.0p-53;
        state_ += kGolden;
        const double u2 = static_cast<double>((mix64(state_) >> 11) + 1) * 0x1.0p-53;
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

private:
    std::uint64_t state_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace pnlm::rng
