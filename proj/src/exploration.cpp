#include "gazeval/exploration.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "gazeval/error.hpp"

namespace gazeval {

namespace {

std::vector<double> axis_profile(std::size_t n, double center, double sigma) {
    std::vector<double> out(n);
    const double k = -0.5 / (sigma * sigma);
    for (std::size_t i = 0; i < n; ++i) {
        const double d = static_cast<double>(i) - center;
        out[i] = std::exp(k * d * d);
    }
    return out;
}

void check_sigma(double sigma) {
    if (!(sigma > 0.0) || !std::isfinite(sigma)) throw Error(ErrorCode::NonPositiveSigma, "sigma must be > 0");
}

// Adds weight * N(.; center, sigma) into `out` using the separable form.
void accumulate_gaussian(Grid& out, PixelCoord center, double sigma, double weight) {
    const auto gx = axis_profile(out.width(), center.x, sigma);
    const auto gy = axis_profile(out.height(), center.y, sigma);
    const double norm = 1.0 / (2.0 * std::numbers::pi * sigma * sigma);
    for (std::size_t j = 0; j < out.height(); ++j) {
        const double row = norm * gy[j];
        for (std::size_t i = 0; i < out.width(); ++i) out(i, j) += weight * (row * gx[i]);
    }
}

}  // namespace

Grid gaussian_at(Dims dims, PixelCoord center, double sigma) {
    check_sigma(sigma);
    Grid out(dims);
    accumulate_gaussian(out, center, sigma, 1.0);
    return out;
}

double phi_weight(const ExplorationParams& params, std::size_t i, std::size_t t) {
    const std::size_t k = params.indexing == PhiIndexing::Lag ? t - i : i;
    return params.phis[std::min(k, params.phis.size() - 1)];
}

Grid exploration_map(Dims dims, std::span<const PixelCoord> history, const ExplorationParams& params) {
    check_sigma(params.sigma);
    if (params.phis.empty()) throw Error(ErrorCode::SchemaViolation, "phis must not be empty");
    Grid out(dims);
    if (history.empty()) return out;
    const std::size_t t = history.size() - 1;
    for (std::size_t i = 0; i <= t; ++i) {
        if (!contains(dims, history[i])) throw Error(ErrorCode::OutOfBoundsFixation, "history point outside the grid");
        accumulate_gaussian(out, history[i], params.sigma, phi_weight(params, i, t));
    }
    return out;
}

}  // namespace gazeval
