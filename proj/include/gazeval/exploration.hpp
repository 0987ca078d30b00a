#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "gazeval/grid.hpp"
#include "gazeval/params.hpp"

namespace gazeval {

struct ExplorationParams {
    std::vector<double> phis;  // sign unconstrained
    double sigma = 1.0;        // pixels
    PhiIndexing indexing = PhiIndexing::Lag;

    static ExplorationParams from(const ModelParams& p) { return {p.phis, p.sigma, p.phi_indexing}; }
};

/// Normalized isotropic 2-D Gaussian density sampled at pixel centers:
///   g[x] = exp(-|x - center|^2 / (2 sigma^2)) / (2 pi sigma^2)
/// No border renormalization.
Grid gaussian_at(Dims dims, PixelCoord center, double sigma);

/// Weight of fixation `i` (0-based) when the current fixation is `t`.
/// Indices past the end of phis reuse the last entry.
double phi_weight(const ExplorationParams& params, std::size_t i, std::size_t t);

/// E[x] = sum_i phi(i) * N(x; history[i], sigma^2 I), including the current
/// fixation. An empty history gives a zero grid. Throws OutOfBoundsFixation
/// and NonPositiveSigma.
Grid exploration_map(Dims dims, std::span<const PixelCoord> history, const ExplorationParams& params);

}  // namespace gazeval
