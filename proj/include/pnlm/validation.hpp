#pragma once

// Monte Carlo verification of the patch-difference distributions: samples D
// under the perfect-match hypothesis (noise drawn once over the union of the
// two patch footprints, so shared pixels are automatically correlated), runs
// Pearson chi-squared goodness-of-fit tests against the fitted densities, and
// emits the variance map and Table-I style summaries as CSV.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "pnlm/patch_stats.hpp"
#include "pnlm/rng.hpp"

namespace pnlm {

struct GofReport {
    PatchGeometry geometry;
    Offset offset;
    std::size_t n_samples = 0;
    double statistic = 0.0;
    double p_value = 0.0;
    double sample_mean = 0.0;
    double sample_variance = 0.0;
};

namespace detail {
inline constexpr std::uint64_t kSamplerDomainTag = 0x73616D706C65ULL;  // "sample"
inline constexpr std::size_t kSamplerBlock = 4096;

inline std::uint64_t signed_tag(int v) {
    return static_cast<std::uint64_t>(static_cast<std::int64_t>(v));
}
}  // namespace detail

// Draws n realizations of D for one offset: each sample draws one i.i.d.
// N(0,1) field over the union of the two patch footprints and accumulates
// D = sum_j (n_{l+j} - n_{k+j})^2 / 2. Sigma is fixed at 1; D is scale-free
// under the perfect-match hypothesis. Samples are generated in fixed-size
// blocks with per-block derived seeds, so any block-parallel schedule yields
// the same sequence.
inline std::vector<double> sample_patch_difference(Offset offset, const PatchGeometry& geometry,
                                                   std::size_t n_samples, std::uint64_t seed) {
    if (offset == Offset{0, 0}) {
        throw std::invalid_argument("sample_patch_difference: zero offset degenerates to D = 0");
    }
    if (n_samples < 1) {
        throw std::invalid_argument("sample_patch_difference: need at least one sample");
    }
    const int p = geometry.patch_side();

    // Assign a slot to every pixel covered by either patch footprint; shared
    // pixels get one slot, which is what creates the correlation.
    const int by0 = std::min(0, offset.dy), by1 = p + std::max(0, offset.dy);
    const int bx0 = std::min(0, offset.dx), bx1 = p + std::max(0, offset.dx);
    const int bw = bx1 - bx0, bh = by1 - by0;
    std::vector<int> slot_of(static_cast<std::size_t>(bw) * bh, -1);
    auto box_index = [&](int y, int x) {
        return static_cast<std::size_t>(y - by0) * bw + (x - bx0);
    };
    int n_slots = 0;
    std::vector<int> slot_a(static_cast<std::size_t>(p) * p);
    std::vector<int> slot_b(static_cast<std::size_t>(p) * p);
    std::size_t j = 0;
    for (int py = 0; py < p; ++py) {
        for (int px = 0; px < p; ++px, ++j) {
            for (const auto [y, x] : {std::pair{py, px}, std::pair{py + offset.dy, px + offset.dx}}) {
                if (slot_of[box_index(y, x)] < 0) slot_of[box_index(y, x)] = n_slots++;
            }
            slot_a[j] = slot_of[box_index(py, px)];
            slot_b[j] = slot_of[box_index(py + offset.dy, px + offset.dx)];
        }
    }

    const std::uint64_t stream =
        rng::derive_stream(seed, {detail::kSamplerDomainTag, detail::signed_tag(offset.dy),
                                  detail::signed_tag(offset.dx), static_cast<std::uint64_t>(p)});

    std::vector<double> samples(n_samples);
    std::vector<double> field(static_cast<std::size_t>(n_slots));
    const std::size_t patch_size = static_cast<std::size_t>(p) * p;
    for (std::size_t block = 0; block * detail::kSamplerBlock < n_samples; ++block) {
        rng::GaussianStream gauss(rng::derive_stream(stream, {block}));
        const std::size_t lo = block * detail::kSamplerBlock;
        const std::size_t hi = std::min(n_samples, lo + detail::kSamplerBlock);
        for (std::size_t i = lo; i < hi; ++i) {
            for (int t = 0; t < n_slots; ++t) field[t] = gauss.next();
            double d = 0.0;
            for (std::size_t q = 0; q < patch_size; ++q) {
                const double diff = field[slot_a[q]] - field[slot_b[q]];
                d += diff * diff;
            }
            samples[i] = 0.5 * d;
        }
    }
    return samples;
}

// Pearson chi-squared test with equal-probability bins (edges from the fitted
// quantiles, so expected counts are uniform even in the tails).
inline GofReport gof_pvalue(const std::vector<double>& samples, const DiffDistribution& dist,
                            int n_bins, const PatchGeometry& geometry, Offset offset) {
    if (samples.empty()) {
        throw std::invalid_argument("gof_pvalue: empty sample set");
    }
    if (n_bins < 5) {
        throw std::invalid_argument("gof_pvalue: need at least 5 bins");
    }
    const double expected = static_cast<double>(samples.size()) / n_bins;
    if (expected < 5.0) {
        throw std::invalid_argument("gof_pvalue: expected bin count " + std::to_string(expected) +
                                    " below 5; need more samples for " + std::to_string(n_bins) +
                                    " bins");
    }

    std::vector<double> edges(n_bins - 1);
    for (int i = 1; i < n_bins; ++i) {
        edges[i - 1] = quantile_D(static_cast<double>(i) / n_bins, dist);
    }
    std::vector<std::size_t> counts(n_bins, 0);
    double mean = 0.0;
    for (double v : samples) {
        const auto it = std::upper_bound(edges.begin(), edges.end(), v);
        ++counts[static_cast<std::size_t>(it - edges.begin())];
        mean += v;
    }
    mean /= static_cast<double>(samples.size());
    double var = 0.0;
    for (double v : samples) var += (v - mean) * (v - mean);
    var /= static_cast<double>(samples.size() - 1);

    double statistic = 0.0;
    for (std::size_t c : counts) {
        const double diff = static_cast<double>(c) - expected;
        statistic += diff * diff / expected;
    }
    const double p_value =
        1.0 - regularized_lower_incomplete_gamma((n_bins - 1) / 2.0, statistic / 2.0);

    return GofReport{geometry, offset, samples.size(), statistic, p_value, mean, var};
}

// The four offsets of maximal patch overlap, one pixel from the center along
// the axes. They have overlap p(p-1), the maximum over nonzero offsets, and
// bound the approximation error of the fitted density from above.
inline std::array<Offset, 4> most_correlated_offsets(const PatchGeometry& geometry) {
    if (geometry.search_radius < 1) {
        throw std::invalid_argument("most_correlated_offsets: search radius must be >= 1");
    }
    return {Offset{0, 1}, Offset{0, -1}, Offset{1, 0}, Offset{-1, 0}};
}

// Theoretical var[D] over the search region; the center cell is NaN (no
// inter-patch difference is defined there).
struct VarianceMap {
    int search_side = 0;
    std::vector<double> values;  // row-major, dy then dx

    double at(int dy, int dx) const {
        const int s = (search_side - 1) / 2;
        return values[static_cast<std::size_t>(dy + s) * search_side + (dx + s)];
    }
};

inline VarianceMap variance_map(const PatchGeometry& geometry) {
    const int s = geometry.search_radius;
    VarianceMap map;
    map.search_side = geometry.search_side();
    map.values.assign(static_cast<std::size_t>(map.search_side) * map.search_side,
                      std::numeric_limits<double>::quiet_NaN());
    for (int dy = -s; dy <= s; ++dy) {
        for (int dx = -s; dx <= s; ++dx) {
            if (dy == 0 && dx == 0) continue;
            map.values[static_cast<std::size_t>(dy + s) * map.search_side + (dx + s)] =
                variance_of_D({dy, dx}, geometry);
        }
    }
    return map;
}

struct Table1Result {
    std::vector<int> patch_sides;
    std::vector<int> search_sides;
    std::vector<double> averaged_p;      // row-major, [patch][search]
    std::vector<GofReport> reports;      // 4 per cell, offset order of most_correlated_offsets
};

// Table-I protocol: per (patch_side, search_side) cell, average the GOF
// p-values over the four most-correlated offsets at n_samples realizations
// each. Sample streams are derived per (seed, patch, search, offset).
inline Table1Result table1_run(const std::vector<int>& patch_sides,
                               const std::vector<int>& search_sides, std::size_t n_samples,
                               std::uint64_t seed, int n_bins = 50) {
    Table1Result result;
    result.patch_sides = patch_sides;
    result.search_sides = search_sides;
    result.averaged_p.reserve(patch_sides.size() * search_sides.size());
    for (int p : patch_sides) {
        if (p < 1 || p % 2 == 0) {
            throw std::invalid_argument("table1_run: patch sides must be odd and >= 1");
        }
        for (int ss : search_sides) {
            if (ss < 3 || ss % 2 == 0) {
                throw std::invalid_argument("table1_run: search sides must be odd and >= 3");
            }
            const PatchGeometry geometry((p - 1) / 2, (ss - 1) / 2);
            double acc = 0.0;
            for (Offset offset : most_correlated_offsets(geometry)) {
                const DiffDistribution dist = detail::make_distribution(
                    geometry.patch_size(), overlap_count(offset, geometry.patch_side()));
                const std::uint64_t cell_seed = rng::derive_stream(
                    seed, {static_cast<std::uint64_t>(p), static_cast<std::uint64_t>(ss)});
                const auto samples = sample_patch_difference(offset, geometry, n_samples, cell_seed);
                GofReport report = gof_pvalue(samples, dist, n_bins, geometry, offset);
                acc += report.p_value;
                result.reports.push_back(report);
            }
            result.averaged_p.push_back(acc / 4.0);
        }
    }
    return result;
}

// Equal-width histogram of samples on [0, mean + span_sigmas * sd] with the
// fitted density evaluated at bin centers, for p.d.f. overlay plots.
struct Histogram {
    std::vector<double> edges;        // n_bins + 1
    std::vector<std::size_t> counts;
    std::vector<double> density;      // counts normalized to unit area
    std::vector<double> theoretical;  // pdf_D at bin centers
};

inline Histogram histogram_vs_density(const std::vector<double>& samples,
                                      const DiffDistribution& dist, int n_bins,
                                      double span_sigmas = 10.0) {
    if (samples.empty() || n_bins < 1) {
        throw std::invalid_argument("histogram_vs_density: need samples and at least one bin");
    }
    Histogram h;
    const double hi = dist.mean + span_sigmas * std::sqrt(dist.variance);
    const double width = hi / n_bins;
    h.edges.resize(n_bins + 1);
    for (int i = 0; i <= n_bins; ++i) h.edges[i] = width * i;
    h.counts.assign(n_bins, 0);
    for (double v : samples) {
        if (v >= hi) continue;
        ++h.counts[static_cast<std::size_t>(v / width)];
    }
    h.density.resize(n_bins);
    h.theoretical.resize(n_bins);
    const double norm = 1.0 / (static_cast<double>(samples.size()) * width);
    for (int i = 0; i < n_bins; ++i) {
        h.density[i] = static_cast<double>(h.counts[i]) * norm;
        h.theoretical[i] = pdf_D(h.edges[i] + 0.5 * width, dist);
    }
    return h;
}

// --- CSV emission ---------------------------------------------------------

namespace detail {
inline std::string csv_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}
}  // namespace detail

inline void write_variance_map_csv(std::ostream& out, const VarianceMap& map) {
    const int s = (map.search_side - 1) / 2;
    out << "dy";
    for (int dx = -s; dx <= s; ++dx) out << "," << dx;
    out << "\n";
    for (int dy = -s; dy <= s; ++dy) {
        out << dy;
        for (int dx = -s; dx <= s; ++dx) {
            const double v = map.at(dy, dx);
            out << ",";
            if (!std::isnan(v)) out << detail::csv_double(v);
        }
        out << "\n";
    }
}

inline void write_distribution_table_csv(std::ostream& out, const DistributionTable& table) {
    out << "dy,dx,overlap,variance,gamma,eta\n";
    table.for_each([&](Offset offset, const DiffDistribution& dist) {
        out << offset.dy << "," << offset.dx << "," << dist.overlap << ","
            << detail::csv_double(dist.variance) << "," << detail::csv_double(dist.gamma) << ","
            << detail::csv_double(dist.eta) << "\n";
    });
}

inline void write_gof_reports_csv(std::ostream& out, const std::vector<GofReport>& reports) {
    out << "patch_side,search_side,dy,dx,n_samples,statistic,p_value,sample_mean,sample_variance\n";
    for (const GofReport& r : reports) {
        out << r.geometry.patch_side() << "," << r.geometry.search_side() << "," << r.offset.dy
            << "," << r.offset.dx << "," << r.n_samples << "," << detail::csv_double(r.statistic)
            << "," << detail::csv_double(r.p_value) << "," << detail::csv_double(r.sample_mean)
            << "," << detail::csv_double(r.sample_variance) << "\n";
    }
}

inline void write_table1_csv(std::ostream& out, const Table1Result& result) {
    out << "patch_side";
    for (int s : result.search_sides) out << ",search_" << s;
    out << "\n";
    for (std::size_t i = 0; i < result.patch_sides.size(); ++i) {
        out << result.patch_sides[i];
        for (std::size_t k = 0; k < result.search_sides.size(); ++k) {
            out << "," << detail::csv_double(result.averaged_p[i * result.search_sides.size() + k]);
        }
        out << "\n";
    }
}

inline void write_histogram_csv(std::ostream& out, const Histogram& h) {
    out << "bin_lo,bin_hi,count,density,theoretical_density\n";
    for (std::size_t i = 0; i < h.counts.size(); ++i) {
        out << detail::csv_double(h.edges[i]) << "," << detail::csv_double(h.edges[i + 1]) << ","
            << h.counts[i] << "," << detail::csv_double(h.density[i]) << ","
            << detail::csv_double(h.theoretical[i]) << "\n";
    }
}

}  // namespace pnlm
