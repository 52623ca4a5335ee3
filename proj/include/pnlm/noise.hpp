#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "pnlm/image.hpp"
#include "pnlm/rng.hpp"

namespace pnlm {

struct NoiseSpec {
    double sigma = 0.0;
    std::uint64_t seed = 0;
};

namespace detail {
inline constexpr std::uint64_t kNoiseDomainTag = 0x6E6F697365ULL;  // "noise"
}

// y_l = x_l + n_l with n_l ~ N(0, sigma^2). Per-pixel counter-based draws, so
// the field depends only on (sigma, seed, pixel index). No clamping.
inline Image add_gaussian_noise(const Image& clean, const NoiseSpec& spec) {
    if (!(spec.sigma > 0.0)) {
        throw std::invalid_argument("add_gaussian_noise: sigma must be > 0");
    }
    const std::uint64_t stream = rng::derive_stream(spec.seed, {detail::kNoiseDomainTag});
    Image out = clean;
    for (std::size_t i = 0; i < out.size(); ++i) {
        out.pixels[i] += spec.sigma * rng::gaussian_at(stream, i);
    }
    return out;
}

struct NoiseEstimate {
    double sigma = 0.0;
    bool degenerate = false;  // constant input, sigma floored
};

// Immerkaer-style estimate: discrete Laplacian residual [1,-2,1; -2,4,-2;
// 1,-2,1], robustified by the median absolute deviation. The mask response to
// unit-variance noise has std 6, and median|N(0,1)| = 0.6745.
inline NoiseEstimate estimate_noise_sigma(const Image& img) {
    if (img.width < 3 || img.height < 3) {
        throw std::invalid_argument("estimate_noise_sigma: image must be at least 3x3");
    }
    std::vector<double> abs_residual;
    abs_residual.reserve(static_cast<std::size_t>(img.width - 2) * (img.height - 2));
    for (int y = 1; y + 1 < img.height; ++y) {
        for (int x = 1; x + 1 < img.width; ++x) {
            const double r = img.at(y - 1, x - 1) - 2.0 * img.at(y - 1, x) + img.at(y - 1, x + 1) -
                             2.0 * img.at(y, x - 1) + 4.0 * img.at(y, x) - 2.0 * img.at(y, x + 1) +
                             img.at(y + 1, x - 1) - 2.0 * img.at(y + 1, x) + img.at(y + 1, x + 1);
            abs_residual.push_back(std::abs(r));
        }
    }
    const std::size_t mid = abs_residual.size() / 2;
    std::nth_element(abs_residual.begin(), abs_residual.begin() + mid, abs_residual.end());
    const double sigma = abs_residual[mid] / (0.6745 * 6.0);
    if (sigma < 1e-6) {
        return NoiseEstimate{1e-6, true};
    }
    return NoiseEstimate{sigma, false};
}

}  // namespace pnlm
