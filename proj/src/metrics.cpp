#include "gazeval/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "gazeval/error.hpp"

namespace gazeval {

std::size_t fixation_pixel(Dims dims, PixelCoord p) noexcept {
    const auto snap = [](double v, std::size_t n) {
        const double r = std::floor(v + 0.5);
        return static_cast<std::size_t>(std::clamp(r, 0.0, static_cast<double>(n - 1)));
    };
    return snap(p.y, dims.height) * dims.width + snap(p.x, dims.width);
}

double nss_at(const Grid& map, PixelCoord fix) {
    const PixelCoord one[] = {fix};
    return nss_set(map, one);
}

double nss_set(const Grid& map, std::span<const PixelCoord> fixations) {
    if (fixations.empty()) throw Error(ErrorCode::EmptyDataset, "nss_set needs at least one fixation");
    if (map.size() < 2) throw Error(ErrorCode::ConstantMap, "map has fewer than 2 pixels");
    const auto [mu, sd] = mean_std(map);
    if (!(sd > 0.0)) throw Error(ErrorCode::ConstantMap, "map has zero variance");
    double sum = 0.0;
    for (const auto& f : fixations) sum += (map.values()[fixation_pixel(map.dims(), f)] - mu) / sd;
    return sum / static_cast<double>(fixations.size());
}

double auc_at(const Grid& map, PixelCoord fix) {
    if (map.size() < 2) throw Error(ErrorCode::DimensionMismatch, "AUC needs at least 2 pixels");
    const auto values = map.values();
    const std::size_t k = fixation_pixel(map.dims(), fix);
    const double vf = values[k];
    std::size_t below = 0, ties = 0;
    for (double v : values) {
        if (v < vf) {
            ++below;
        } else if (v == vf) {
            ++ties;
        }
    }
    --ties;  // the fixated pixel itself
    return (static_cast<double>(below) + 0.5 * static_cast<double>(ties)) / static_cast<double>(values.size() - 1);
}

double auc_set(const Grid& map, std::span<const PixelCoord> fixations) {
    if (fixations.empty()) throw Error(ErrorCode::EmptyDataset, "auc_set needs at least one fixation");
    double sum = 0.0;
    for (const auto& f : fixations) sum += auc_at(map, f);
    return sum / static_cast<double>(fixations.size());
}

}  // namespace gazeval
