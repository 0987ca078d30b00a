#include "gazeval/cost.hpp"

#include <cmath>

#include "gazeval/error.hpp"

namespace gazeval {

namespace {

void require_inside(Dims dims, PixelCoord p, const char* what) {
    if (!contains(dims, p)) throw Error(ErrorCode::OutOfBoundsFixation, std::string(what) + " lies outside the grid");
}

}  // namespace

double amplitude(PixelCoord from, PixelCoord to) noexcept { return std::hypot(to.x - from.x, to.y - from.y); }

double relative_angle(PixelCoord prev, PixelCoord cur, PixelCoord next) noexcept {
    const double ax = cur.x - prev.x, ay = cur.y - prev.y;
    const double bx = next.x - cur.x, by = next.y - cur.y;
    if ((ax == 0.0 && ay == 0.0) || (bx == 0.0 && by == 0.0)) return 0.0;
    return std::atan2(std::abs(ax * by - ay * bx), ax * bx + ay * by);
}

double absolute_angle(PixelCoord cur, PixelCoord next) noexcept {
    const double bx = next.x - cur.x, by = next.y - cur.y;
    if (bx == 0.0 && by == 0.0) return 0.0;
    return std::atan2(std::abs(by), bx);
}

SaccadeGeometry saccade_geometry(PixelCoord prev, PixelCoord cur, PixelCoord next) noexcept {
    return {amplitude(cur, next), relative_angle(prev, cur, next), absolute_angle(cur, next)};
}

double amplitude_value(const CostProfile& profile, double degrees) {
    const auto& edges = profile.amplitude_bin_edges;
    const auto& values = profile.amplitude_values;
    const std::size_t n = values.size();
    const auto mid = [&](std::size_t k) { return 0.5 * (edges[k] + edges[k + 1]); };
    if (n == 1 || degrees <= mid(0)) return values.front();
    if (degrees >= mid(n - 1)) return values.back();
    std::size_t k = 0;
    while (degrees > mid(k + 1)) ++k;
    const double t = (degrees - mid(k)) / (mid(k + 1) - mid(k));
    return values[k] + t * (values[k + 1] - values[k]);
}

Grid cost_map(Dims dims, PixelCoord prev, PixelCoord cur, const CostProfile& profile) {
    require_inside(dims, prev, "previous fixation");
    require_inside(dims, cur, "current fixation");

    const double inv_ppd = 1.0 / profile.pixels_per_degree;
    Grid out(dims);
    for (std::size_t j = 0; j < dims.height; ++j) {
        for (std::size_t i = 0; i < dims.width; ++i) {
            const PixelCoord x{static_cast<double>(i), static_cast<double>(j)};
            out(i, j) = amplitude_value(profile, amplitude(cur, x) * inv_ppd) +
                        profile.psi1 * relative_angle(prev, cur, x) + profile.psi2 * absolute_angle(cur, x);
        }
    }
    return out;
}

CostProfile default_cost_profile() {
    CostProfile p;
    p.pixels_per_degree = 1.0;
    p.amplitude_bin_edges = {0.0, 2.0, 4.0, 8.0, 12.0, 16.0, 24.0, 32.0, 48.0, 64.0, 96.0};
    p.amplitude_values = {0.0, -1.6e-4, -4.8e-4, -8.8e-4, -12.8e-4, -19.2e-4, -27.2e-4, -38.4e-4, -51.2e-4, -64.0e-4};
    p.psi1 = -4.0e-4;
    p.psi2 = -2.0e-4;
    return p;
}

}  // namespace gazeval
