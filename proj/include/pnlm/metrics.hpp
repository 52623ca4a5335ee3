#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "pnlm/image.hpp"

namespace pnlm {

inline double psnr(const Image& reference, const Image& test, double peak = 255.0) {
    if (!reference.same_size(test)) {
        throw std::invalid_argument("psnr: image dimensions differ");
    }
    if (!(peak > 0.0)) {
        throw std::invalid_argument("psnr: peak must be > 0");
    }
    double sq = 0.0;
    for (std::size_t i = 0; i < reference.size(); ++i) {
        const double d = reference.pixels[i] - test.pixels[i];
        sq += d * d;
    }
    const double mse = sq / static_cast<double>(reference.size());
    if (mse == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(peak * peak / mse);
}

struct SsimParams {
    int window = 11;
    double window_sigma = 1.5;
    double k1 = 0.01;
    double k2 = 0.03;
    double dynamic_range = 255.0;
};

namespace detail {

inline std::vector<double> gaussian_kernel_1d(int window, double sigma) {
    std::vector<double> k(window);
    const double c = (window - 1) / 2.0;
    double sum = 0.0;
    for (int i = 0; i < window; ++i) {
        k[i] = std::exp(-(i - c) * (i - c) / (2.0 * sigma * sigma));
        sum += k[i];
    }
    for (double& v : k) v /= sum;
    return k;
}

// Separable valid-region Gaussian filter: output is (h-w+1) x (w-w+1).
inline std::vector<double> gaussian_filter_valid(const std::vector<double>& img, int width,
                                                 int height, const std::vector<double>& kernel,
                                                 int& out_w, int& out_h) {
    const int win = static_cast<int>(kernel.size());
    out_w = width - win + 1;
    out_h = height - win + 1;
    std::vector<double> horiz(static_cast<std::size_t>(height) * out_w);
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < out_w; ++x) {
            double acc = 0.0;
            for (int i = 0; i < win; ++i) acc += kernel[i] * img[static_cast<std::size_t>(y) * width + x + i];
            horiz[static_cast<std::size_t>(y) * out_w + x] = acc;
        }
    }
    std::vector<double> out(static_cast<std::size_t>(out_h) * out_w);
    for (int y = 0; y < out_h; ++y) {
        for (int x = 0; x < out_w; ++x) {
            double acc = 0.0;
            for (int i = 0; i < win; ++i) acc += kernel[i] * horiz[static_cast<std::size_t>(y + i) * out_w + x];
            out[static_cast<std::size_t>(y) * out_w + x] = acc;
        }
    }
    return out;
}

}  // namespace detail

// Mean of the local SSIM map over all fully-covered window positions,
// Gaussian-weighted local statistics per the standard definition.
inline double ssim(const Image& reference, const Image& test, const SsimParams& params = {}) {
    if (!reference.same_size(test)) {
        throw std::invalid_argument("ssim: image dimensions differ");
    }
    if (params.window < 3 || params.window % 2 == 0) {
        throw std::invalid_argument("ssim: window must be odd and >= 3");
    }
    if (!(params.k1 > 0.0) || !(params.k2 > 0.0) || !(params.dynamic_range > 0.0)) {
        throw std::invalid_argument("ssim: k1, k2 and dynamic_range must be > 0");
    }
    if (reference.width < params.window || reference.height < params.window) {
        throw std::invalid_argument("ssim: image smaller than window");
    }

    const int w = reference.width, h = reference.height;
    const std::size_t n = reference.size();
    std::vector<double> xx(n), yy(n), xy(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double a = reference.pixels[i], b = test.pixels[i];
        xx[i] = a * a;
        yy[i] = b * b;
        xy[i] = a * b;
    }

    const auto kernel = detail::gaussian_kernel_1d(params.window, params.window_sigma);
    int ow = 0, oh = 0;
    const auto mu_x = detail::gaussian_filter_valid(reference.pixels, w, h, kernel, ow, oh);
    const auto mu_y = detail::gaussian_filter_valid(test.pixels, w, h, kernel, ow, oh);
    const auto e_xx = detail::gaussian_filter_valid(xx, w, h, kernel, ow, oh);
    const auto e_yy = detail::gaussian_filter_valid(yy, w, h, kernel, ow, oh);
    const auto e_xy = detail::gaussian_filter_valid(xy, w, h, kernel, ow, oh);

    const double c1 = params.k1 * params.dynamic_range * params.k1 * params.dynamic_range;
    const double c2 = params.k2 * params.dynamic_range * params.k2 * params.dynamic_range;

    double acc = 0.0;
    const std::size_t m = mu_x.size();
    for (std::size_t i = 0; i < m; ++i) {
        const double mx = mu_x[i], my = mu_y[i];
        const double vx = e_xx[i] - mx * mx;
        const double vy = e_yy[i] - my * my;
        const double cov = e_xy[i] - mx * my;
        acc += ((2.0 * mx * my + c1) * (2.0 * cov + c2)) /
               ((mx * mx + my * my + c1) * (vx + vy + c2));
    }
    return acc / static_cast<double>(m);
}

}  // namespace pnlm
