#pragma once

// Statistics of the normalized patch difference D between two noisy patches
// whose clean content matches. D is chi-squared with |patch| degrees of
// freedom when the patches are disjoint; overlapping patches share noise
// pixels, which inflates the variance to 2|patch| + |overlap|. A scaled
// chi-squared fit matched to the first two cumulants gives a closed-form
// density per spatial offset.

#include <cmath>
#include <cstdlib>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "pnlm/special_functions.hpp"

namespace pnlm {

struct PatchGeometry {
    int patch_radius = 3;   // patch side = 2r+1
    int search_radius = 10; // search side = 2s+1

    PatchGeometry() = default;
    PatchGeometry(int r, int s) : patch_radius(r), search_radius(s) {
        if (r < 0 || s < 0) {
            throw std::invalid_argument("PatchGeometry: radii must be >= 0");
        }
    }

    int patch_side() const { return 2 * patch_radius + 1; }
    int search_side() const { return 2 * search_radius + 1; }
    int patch_size() const { return patch_side() * patch_side(); }
    int search_size() const { return search_side() * search_side(); }
};

struct Offset {
    int dy = 0;
    int dx = 0;
    bool operator==(const Offset&) const = default;
};

// Per-offset law of D: mean = |patch|, variance = 2|patch| + overlap, and the
// scaled chi-squared parameters gamma (scale) and eta (effective d.o.f.) with
// gamma * eta = mean.
struct DiffDistribution {
    double mean = 0.0;
    double variance = 0.0;
    double gamma = 0.0;
    double eta = 0.0;
    int overlap = 0;
};

// Number of image pixels covered by both the patch at l and the patch at
// l + offset.
inline int overlap_count(Offset offset, int patch_side) {
    if (patch_side < 1 || patch_side % 2 == 0) {
        throw std::invalid_argument("overlap_count: patch_side must be odd and >= 1");
    }
    const int oy = patch_side - std::abs(offset.dy);
    const int ox = patch_side - std::abs(offset.dx);
    return (oy > 0 ? oy : 0) * (ox > 0 ? ox : 0);
}

inline double variance_of_D(Offset offset, const PatchGeometry& geometry) {
    if (offset == Offset{0, 0}) {
        throw std::invalid_argument("variance_of_D: zero offset has no inter-patch difference");
    }
    if (std::abs(offset.dy) > geometry.search_radius || std::abs(offset.dx) > geometry.search_radius) {
        throw std::invalid_argument("variance_of_D: offset outside search region");
    }
    return 2.0 * geometry.patch_size() + overlap_count(offset, geometry.patch_side());
}

// Moment-matched scaled chi-squared parameters: gamma = var/(2 mean),
// eta = mean/gamma.
inline std::pair<double, double> fit_scaled_chi2(double mean, double variance) {
    if (!(mean > 0.0) || !(variance > 0.0)) {
        throw std::invalid_argument("fit_scaled_chi2: mean and variance must be > 0");
    }
    const double gamma = variance / (2.0 * mean);
    return {gamma, mean / gamma};
}

namespace detail {
inline DiffDistribution make_distribution(int patch_size, int overlap) {
    const double mean = patch_size;
    const double variance = 2.0 * patch_size + overlap;
    const auto [gamma, eta] = fit_scaled_chi2(mean, variance);
    return DiffDistribution{mean, variance, gamma, eta, overlap};
}
}  // namespace detail

// Density of D = gamma * chi2_eta, with the 1/gamma change-of-variables
// factor so it integrates to 1 in D.
inline double pdf_D(double d, const DiffDistribution& dist) {
    if (d < 0.0) {
        throw std::invalid_argument("pdf_D: d must be >= 0");
    }
    const double half_eta = dist.eta / 2.0;
    if (d == 0.0) {
        if (dist.eta > 2.0) return 0.0;
        if (dist.eta == 2.0) return 1.0 / (2.0 * dist.gamma);
        return std::numeric_limits<double>::infinity();
    }
    const double log_density = (half_eta - 1.0) * std::log(d / dist.gamma) - d / (2.0 * dist.gamma) -
                               half_eta * std::numbers::ln2 - ln_gamma(half_eta) -
                               std::log(dist.gamma);
    return std::exp(log_density);
}

inline double cdf_D(double d, const DiffDistribution& dist) {
    if (d < 0.0) {
        throw std::invalid_argument("cdf_D: d must be >= 0");
    }
    if (d == 0.0) return 0.0;
    return regularized_lower_incomplete_gamma(dist.eta / 2.0, d / (2.0 * dist.gamma));
}

// Inverse CDF by bracketed bisection, robust over speed: this only runs at
// table-construction time.
inline double quantile_D(double q, const DiffDistribution& dist) {
    if (!(q > 0.0) || !(q < 1.0)) {
        throw std::invalid_argument("quantile_D: q must lie in (0, 1)");
    }
    double lo = 0.0;
    double hi = dist.mean + 20.0 * std::sqrt(dist.variance);
    while (cdf_D(hi, dist) < q) hi *= 2.0;
    double mid = 0.5 * (lo + hi);
    for (int i = 0; i < 200; ++i) {
        mid = 0.5 * (lo + hi);
        const double c = cdf_D(mid, dist);
        if (std::abs(c - q) <= 1e-12) break;
        if (c < q) {
            lo = mid;
        } else {
            hi = mid;
        }
        if (hi - lo <= 1e-14 * (1.0 + hi)) break;
    }
    return mid;
}

// Equal-tail central interval holding probability mass alpha; alpha = 1
// returns the full support (0, +inf).
inline std::pair<double, double> critical_interval(double alpha, const DiffDistribution& dist) {
    if (!(alpha > 0.0) || alpha > 1.0) {
        throw std::invalid_argument("critical_interval: alpha must lie in (0, 1]");
    }
    if (alpha == 1.0) {
        return {0.0, std::numeric_limits<double>::infinity()};
    }
    const double tail = (1.0 - alpha) / 2.0;
    return {quantile_D(tail, dist), quantile_D(1.0 - tail, dist)};
}

// Self-weight rule: the plain chi-squared density of the patch size evaluated
// at its mean, i.e. the weight of the most probable matching patch. The raw
// density at zero would under-weight the noisy center pixel.
inline double center_pixel_weight(const PatchGeometry& geometry) {
    const DiffDistribution dist = detail::make_distribution(geometry.patch_size(), 0);
    return pdf_D(static_cast<double>(geometry.patch_size()), dist);
}

// Distributions for every off-center offset of the search region, computed
// once per geometry and shared read-only afterwards. The law depends only on
// the offset, never on the pixel location.
class DistributionTable {
public:
    explicit DistributionTable(const PatchGeometry& geometry) : geometry_(geometry) {
        const int side = geometry.search_side();
        entries_.reserve(static_cast<std::size_t>(side) * side);
        for (int dy = -geometry.search_radius; dy <= geometry.search_radius; ++dy) {
            for (int dx = -geometry.search_radius; dx <= geometry.search_radius; ++dx) {
                if (dy == 0 && dx == 0) {
                    entries_.push_back(DiffDistribution{});  // center slot, never served
                    continue;
                }
                entries_.push_back(detail::make_distribution(
                    geometry.patch_size(), overlap_count({dy, dx}, geometry.patch_side())));
            }
        }
    }

    const PatchGeometry& geometry() const { return geometry_; }

    bool contains(Offset offset) const {
        return !(offset == Offset{0, 0}) && std::abs(offset.dy) <= geometry_.search_radius &&
               std::abs(offset.dx) <= geometry_.search_radius;
    }

    const DiffDistribution& at(Offset offset) const {
        if (!contains(offset)) {
            throw std::invalid_argument("DistributionTable: offset (" + std::to_string(offset.dy) +
                                        "," + std::to_string(offset.dx) + ") not in table");
        }
        return entries_[index(offset)];
    }

    std::size_t size() const { return entries_.size() - 1; }  // off-center entries

    template <typename Fn>
    void for_each(Fn&& fn) const {
        const int s = geometry_.search_radius;
        for (int dy = -s; dy <= s; ++dy) {
            for (int dx = -s; dx <= s; ++dx) {
                if (dy == 0 && dx == 0) continue;
                fn(Offset{dy, dx}, entries_[index({dy, dx})]);
            }
        }
    }

private:
    std::size_t index(Offset offset) const {
        const int s = geometry_.search_radius;
        return static_cast<std::size_t>(offset.dy + s) * geometry_.search_side() + (offset.dx + s);
    }

    PatchGeometry geometry_;
    std::vector<DiffDistribution> entries_;
};

inline DistributionTable build_distribution_table(const PatchGeometry& geometry) {
    return DistributionTable(geometry);
}

}  // namespace pnlm
