#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace pnlm {

// Grayscale image of double intensities, row-major. Nominal range is
// [0, 255]; values may leave that range after noise addition and are only
// clamped when written to disk.
struct Image {
    int width = 0;
    int height = 0;
    std::vector<double> pixels;

    Image() = default;

    Image(int w, int h, double fill = 0.0) : width(w), height(h) {
        if (w < 1 || h < 1) {
            throw std::invalid_argument("Image: dimensions must be >= 1, got " +
                                        std::to_string(w) + "x" + std::to_string(h));
        }
        pixels.assign(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), fill);
    }

    Image(int w, int h, std::vector<double> data) : width(w), height(h), pixels(std::move(data)) {
        if (w < 1 || h < 1) {
            throw std::invalid_argument("Image: dimensions must be >= 1");
        }
        if (pixels.size() != static_cast<std::size_t>(w) * static_cast<std::size_t>(h)) {
            throw std::invalid_argument("Image: pixel count does not match dimensions");
        }
    }

    std::size_t size() const { return pixels.size(); }

    double at(int y, int x) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
    double& at(int y, int x) { return pixels[static_cast<std::size_t>(y) * width + x]; }

    bool same_size(const Image& other) const {
        return width == other.width && height == other.height;
    }

    bool all_finite() const {
        for (double v : pixels) {
            if (!std::isfinite(v)) return false;
        }
        return true;
    }
};

// Mirror padding that reflects about the boundary pixel line without
// repeating the edge pixel: [a,b,c] with radius 1 becomes [b,a,b,c,b].
inline Image pad_symmetric(const Image& img, int radius) {
    if (radius < 0) {
        throw std::invalid_argument("pad_symmetric: radius must be >= 0");
    }
    if (radius >= img.width || radius >= img.height) {
        throw std::invalid_argument("pad_symmetric: radius " + std::to_string(radius) +
                                    " too large for " + std::to_string(img.width) + "x" +
                                    std::to_string(img.height) + " image");
    }
    if (radius == 0) return img;

    // radius < min(width, height) guarantees a single reflection suffices
    auto reflect = [](int i, int n) {
        if (i < 0) return -i;
        if (i >= n) return 2 * n - 2 - i;
        return i;
    };

    Image out(img.width + 2 * radius, img.height + 2 * radius);
    for (int y = 0; y < out.height; ++y) {
        const int sy = reflect(y - radius, img.height);
        for (int x = 0; x < out.width; ++x) {
            out.at(y, x) = img.at(sy, reflect(x - radius, img.width));
        }
    }
    return out;
}

inline Image generate_checkerboard(int width, int height, int block, double low, double high) {
    if (block < 1) {
        throw std::invalid_argument("generate_checkerboard: block must be >= 1");
    }
    if (!(low >= 0.0 && low < high && high <= 255.0)) {
        throw std::invalid_argument("generate_checkerboard: levels must satisfy 0 <= low < high <= 255");
    }
    Image out(width, height);
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            out.at(y, x) = ((y / block + x / block) % 2 == 0) ? low : high;
        }
    }
    return out;
}

}  // namespace pnlm
