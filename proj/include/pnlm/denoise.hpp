#pragma once

// Sliding-window denoising engine: for every pixel, weights all candidates in
// the search region by patch similarity and aggregates them by weighted mean
// or weighted median. Summation order over offsets is fixed row-major, so the
// output is bit-identical for any worker count.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <thread>
#include <variant>
#include <vector>

#include "pnlm/image.hpp"
#include "pnlm/noise.hpp"
#include "pnlm/patch_stats.hpp"
#include "pnlm/weights.hpp"

namespace pnlm {

enum class Aggregator { WeightedMean, WeightedMedian };

struct RejectionOff {};
struct RejectUpper {
    double alpha = 0.999;
};
struct RejectTwoSided {
    double alpha = 0.999;
};
using RejectionPolicy = std::variant<RejectionOff, RejectUpper, RejectTwoSided>;

struct KnownSigma {
    double sigma = 0.0;
};
struct EstimatedSigma {};
using SigmaSource = std::variant<KnownSigma, EstimatedSigma>;

struct DenoiseConfig {
    PatchGeometry geometry{3, 10};
    WeightKind weight_kind = WeightKind::Probabilistic;
    Aggregator aggregator = Aggregator::WeightedMean;
    RejectionPolicy rejection = RejectionOff{};
    SigmaSource sigma_source = KnownSigma{};
    double rho = 1.0;       // probabilistic, estimated-sigma runs only
    double h_factor = 1.0;  // classic weight: h = h_factor * |patch| * sigma_hat^2
};

struct RunStats {
    std::uint64_t pixels = 0;
    std::uint64_t candidates_total = 0;
    std::uint64_t candidates_rejected = 0;
    double seconds = 0.0;
};

struct DenoiseResult {
    Image image;
    RunStats stats;
};

// Exact sum of squared differences over the patch footprints centered at
// linear indices l and k of the padded image.
inline double patch_ssd(const Image& padded, std::size_t l, std::size_t k,
                        const PatchGeometry& geometry) {
    const int r = geometry.patch_radius;
    const int w = padded.width;
    const auto in_bounds = [&](std::size_t idx) {
        const int y = static_cast<int>(idx / w);
        const int x = static_cast<int>(idx % w);
        return y - r >= 0 && y + r < padded.height && x - r >= 0 && x + r < w;
    };
    if (l >= padded.size() || k >= padded.size() || !in_bounds(l) || !in_bounds(k)) {
        throw std::invalid_argument("patch_ssd: patch exceeds image bounds");
    }
    double acc = 0.0;
    for (int py = -r; py <= r; ++py) {
        const double* a = &padded.pixels[l + static_cast<std::size_t>(py) * w - r];
        const double* b = &padded.pixels[k + static_cast<std::size_t>(py) * w - r];
        for (int i = 0; i <= 2 * r; ++i) {
            const double d = a[i] - b[i];
            acc += d * d;
        }
    }
    return acc;
}

// D = ssd / (2 sigma^2), the chi-squared-test normalization of the patch
// difference.
inline double patch_difference_D(double ssd, double sigma) {
    if (!(sigma > 0.0)) {
        throw std::invalid_argument("patch_difference_D: sigma must be > 0");
    }
    return ssd / (2.0 * sigma * sigma);
}

namespace detail {

// Per-offset constants for the hot loop: log-space density coefficients and
// the precomputed rejection window.
struct OffsetEval {
    int dy = 0;
    int dx = 0;
    std::ptrdiff_t step = 0;    // linear displacement in the padded image
    double log_coeff = 0.0;     // -(eta/2) ln 2 - lnGamma(eta/2) - ln gamma
    double power = 0.0;         // eta/2 - 1
    double inv_gamma = 0.0;
    double inv_two_gamma = 0.0;
    double eta = 0.0;
    double reject_lo = 0.0;
    double reject_hi = std::numeric_limits<double>::infinity();
};

inline double eval_pdf(double d, const OffsetEval& e) {
    if (d == 0.0) {
        if (e.eta > 2.0) return 0.0;
        if (e.eta == 2.0) return 0.5 * e.inv_gamma;
        return std::numeric_limits<double>::infinity();
    }
    return std::exp(e.power * std::log(d * e.inv_gamma) - d * e.inv_two_gamma + e.log_coeff);
}

struct Candidate {
    double value;
    double weight;
};

inline double weighted_median(std::vector<Candidate>& cands, double total_weight) {
    // ties keep their row-major offset order
    std::stable_sort(cands.begin(), cands.end(),
                     [](const Candidate& a, const Candidate& b) { return a.value < b.value; });
    const double half = total_weight / 2.0;
    double cum = 0.0;
    for (const Candidate& c : cands) {
        cum += c.weight;
        if (cum >= half) return c.value;
    }
    return cands.back().value;
}

}  // namespace detail

// threads = 0 picks hardware concurrency. Output rows are partitioned into
// contiguous bands; every pixel's reduction is sequential, so results do not
// depend on the thread count.
inline DenoiseResult denoise(const Image& noisy, const DenoiseConfig& config, int threads = 0) {
    const auto t_start = std::chrono::steady_clock::now();
    const int r = config.geometry.patch_radius;
    const int s = config.geometry.search_radius;
    const int pad = r + s;
    if (pad >= noisy.width || pad >= noisy.height) {
        throw std::invalid_argument("denoise: image too small for patch/search geometry");
    }

    double sigma_hat = 0.0;
    double rho = 1.0;
    if (const auto* known = std::get_if<KnownSigma>(&config.sigma_source)) {
        if (!(known->sigma > 0.0)) {
            throw std::invalid_argument("denoise: known sigma must be > 0");
        }
        sigma_hat = known->sigma;
    } else {
        sigma_hat = estimate_noise_sigma(noisy).sigma;
        rho = config.rho;
    }

    const WeightModel model =
        build_weight_model(config.weight_kind, config.geometry, sigma_hat, rho, config.h_factor);
    const bool probabilistic = std::holds_alternative<Probabilistic>(model);
    if (!probabilistic && !std::holds_alternative<RejectionOff>(config.rejection)) {
        throw std::invalid_argument(
            "denoise: early rejection requires the probabilistic weight model (thresholds come "
            "from the patch-difference density)");
    }

    const Image padded = pad_symmetric(noisy, pad);
    const int side = config.geometry.search_side();
    const std::size_t n_offsets = static_cast<std::size_t>(side) * side;

    // Precompute per-offset evaluation constants in row-major offset order.
    std::vector<detail::OffsetEval> evals;
    double cpw = 1.0;
    double h = 0.0;
    double inv_two_sigma_sq = 0.0;
    double inv_rho_sq = 1.0;
    if (probabilistic) {
        const auto& prob = std::get<Probabilistic>(model);
        cpw = prob.cpw;
        inv_two_sigma_sq = 1.0 / (2.0 * prob.sigma_hat * prob.sigma_hat);
        inv_rho_sq = 1.0 / (prob.rho * prob.rho);
        evals.reserve(n_offsets);
        for (int dy = -s; dy <= s; ++dy) {
            for (int dx = -s; dx <= s; ++dx) {
                detail::OffsetEval e;
                e.dy = dy;
                e.dx = dx;
                e.step = static_cast<std::ptrdiff_t>(dy) * padded.width + dx;
                if (dy == 0 && dx == 0) {
                    evals.push_back(e);
                    continue;
                }
                const DiffDistribution& dist = prob.table.at({dy, dx});
                const double half_eta = dist.eta / 2.0;
                e.log_coeff =
                    -half_eta * std::numbers::ln2 - ln_gamma(half_eta) - std::log(dist.gamma);
                e.power = half_eta - 1.0;
                e.inv_gamma = 1.0 / dist.gamma;
                e.inv_two_gamma = 0.5 / dist.gamma;
                e.eta = dist.eta;
                if (const auto* up = std::get_if<RejectUpper>(&config.rejection)) {
                    if (!(up->alpha > 0.0) || !(up->alpha < 1.0)) {
                        throw std::invalid_argument("denoise: rejection alpha must lie in (0, 1)");
                    }
                    e.reject_hi = quantile_D(up->alpha, dist);
                } else if (const auto* two = std::get_if<RejectTwoSided>(&config.rejection)) {
                    if (!(two->alpha > 0.0) || !(two->alpha < 1.0)) {
                        throw std::invalid_argument("denoise: rejection alpha must lie in (0, 1)");
                    }
                    const auto [lo, hi] = critical_interval(two->alpha, dist);
                    e.reject_lo = lo;
                    e.reject_hi = hi;
                }
                evals.push_back(e);
            }
        }
    } else {
        h = std::get<ClassicExponential>(model).h;
        evals.reserve(n_offsets);
        for (int dy = -s; dy <= s; ++dy) {
            for (int dx = -s; dx <= s; ++dx) {
                detail::OffsetEval e;
                e.dy = dy;
                e.dx = dx;
                e.step = static_cast<std::ptrdiff_t>(dy) * padded.width + dx;
                evals.push_back(e);
            }
        }
    }

    Image out(noisy.width, noisy.height);
    std::vector<std::uint64_t> rejected_per_row(noisy.height, 0);

    auto process_rows = [&](int y_begin, int y_end) {
        std::vector<detail::Candidate> cands;
        if (config.aggregator == Aggregator::WeightedMedian) cands.reserve(n_offsets);
        for (int y = y_begin; y < y_end; ++y) {
            std::uint64_t rejected = 0;
            for (int x = 0; x < noisy.width; ++x) {
                const std::size_t center =
                    static_cast<std::size_t>(y + pad) * padded.width + (x + pad);
                double num = 0.0;
                double den = 0.0;
                cands.clear();
                for (const detail::OffsetEval& e : evals) {
                    const std::size_t cand = center + e.step;
                    double w;
                    if (e.dy == 0 && e.dx == 0) {
                        w = cpw;
                    } else {
                        double ssd = 0.0;
                        for (int py = -r; py <= r; ++py) {
                            const double* a =
                                &padded.pixels[center + static_cast<std::size_t>(py) * padded.width - r];
                            const double* b = a + e.step;
                            for (int i = 0; i <= 2 * r; ++i) {
                                const double d = a[i] - b[i];
                                ssd += d * d;
                            }
                        }
                        if (probabilistic) {
                            const double arg = ssd * inv_two_sigma_sq * inv_rho_sq;
                            if (arg < e.reject_lo || arg > e.reject_hi) {
                                w = 0.0;
                                ++rejected;
                            } else {
                                w = detail::eval_pdf(arg, e);
                            }
                        } else {
                            w = std::exp(-ssd / h);
                        }
                    }
                    if (!std::isfinite(w)) {
                        throw std::runtime_error("denoise: nonfinite weight at offset (" +
                                                 std::to_string(e.dy) + "," + std::to_string(e.dx) +
                                                 ")");
                    }
                    if (config.aggregator == Aggregator::WeightedMean) {
                        num += w * padded.pixels[cand];
                        den += w;
                    } else {
                        cands.push_back({padded.pixels[cand], w});
                        den += w;
                    }
                }
                out.at(y, x) = (config.aggregator == Aggregator::WeightedMean)
                                   ? num / den
                                   : detail::weighted_median(cands, den);
            }
            rejected_per_row[y] += rejected;
        }
    };

    int n_threads = threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
    if (n_threads < 1) n_threads = 1;
    n_threads = std::min(n_threads, noisy.height);

    if (n_threads == 1) {
        process_rows(0, noisy.height);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(n_threads);
        std::exception_ptr error;
        std::mutex error_mutex;
        const int rows_per_band = (noisy.height + n_threads - 1) / n_threads;
        for (int t = 0; t < n_threads; ++t) {
            const int y0 = t * rows_per_band;
            const int y1 = std::min(noisy.height, y0 + rows_per_band);
            if (y0 >= y1) break;
            pool.emplace_back([&, y0, y1] {
                try {
                    process_rows(y0, y1);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error) error = std::current_exception();
                }
            });
        }
        for (auto& th : pool) th.join();
        if (error) std::rethrow_exception(error);
    }

    RunStats stats;
    stats.pixels = out.size();
    stats.candidates_total = static_cast<std::uint64_t>(out.size()) * n_offsets;
    for (std::uint64_t v : rejected_per_row) stats.candidates_rejected += v;
    stats.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return DenoiseResult{std::move(out), stats};
}

// input - denoised, shifted by +128 so the residual is visible as an image.
inline Image method_noise(const Image& input, const Image& denoised) {
    if (!input.same_size(denoised)) {
        throw std::invalid_argument("method_noise: image dimensions differ");
    }
    Image out(input.width, input.height);
    for (std::size_t i = 0; i < input.size(); ++i) {
        out.pixels[i] = input.pixels[i] - denoised.pixels[i] + 128.0;
    }
    return out;
}

}  // namespace pnlm
