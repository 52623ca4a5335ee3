#pragma once

// The two weight functions behind one interface: the classic exponential
// similarity kernel and the probabilistic weight, which is the density of the
// patch difference under the perfect-match hypothesis evaluated at the
// observed (rescaled) difference.

#include <cmath>
#include <stdexcept>
#include <variant>

#include "pnlm/patch_stats.hpp"

namespace pnlm {

struct ClassicExponential {
    double h = 0.0;  // temperature, default |patch| * sigma^2
};

struct Probabilistic {
    double rho = 1.0;        // rho^2 = sigma^2 / sigma_hat^2
    double sigma_hat = 0.0;
    DistributionTable table;
    double cpw = 0.0;        // self-weight, chi2_{|patch|} density at |patch|
};

using WeightModel = std::variant<ClassicExponential, Probabilistic>;

enum class WeightKind { Classic, Probabilistic };

inline double classic_weight(double ssd, double h) {
    if (ssd < 0.0) {
        throw std::invalid_argument("classic_weight: ssd must be >= 0");
    }
    if (!(h > 0.0)) {
        throw std::invalid_argument("classic_weight: h must be > 0");
    }
    return std::exp(-ssd / h);
}

// d_hat is the patch difference computed with the estimated variance; the
// rho^2 rescaling restores the true-variance law. The center offset is served
// by the model's fixed self-weight.
inline double probabilistic_weight(double d_hat, Offset offset, const Probabilistic& model) {
    if (d_hat < 0.0) {
        throw std::invalid_argument("probabilistic_weight: d_hat must be >= 0");
    }
    if (offset == Offset{0, 0}) {
        return model.cpw;
    }
    return pdf_D(d_hat / (model.rho * model.rho), model.table.at(offset));
}

inline WeightModel build_weight_model(WeightKind kind, const PatchGeometry& geometry,
                                      double sigma_hat, double rho = 1.0, double h_factor = 1.0) {
    if (!(sigma_hat > 0.0)) {
        throw std::invalid_argument("build_weight_model: sigma_hat must be > 0");
    }
    if (kind == WeightKind::Classic) {
        if (!(h_factor > 0.0)) {
            throw std::invalid_argument("build_weight_model: h_factor must be > 0");
        }
        return ClassicExponential{h_factor * geometry.patch_size() * sigma_hat * sigma_hat};
    }
    if (!(rho > 0.0)) {
        throw std::invalid_argument("build_weight_model: rho must be > 0");
    }
    return Probabilistic{rho, sigma_hat, build_distribution_table(geometry),
                         center_pixel_weight(geometry)};
}

}  // namespace pnlm
