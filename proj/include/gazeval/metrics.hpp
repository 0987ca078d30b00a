#pragma once

#include <cstddef>
#include <span>
#include <string>

#include "gazeval/grid.hpp"

namespace gazeval {

struct ScoreSample {
    std::string image_id;
    std::string subject_id;
    std::size_t ordinal_position = 1;  // 1-based index of the predicted fixation
    double nss = 0.0;
    double auc = 0.5;
};

/// Pixel holding `p`: round half up, then clamp into the grid.
std::size_t fixation_pixel(Dims dims, PixelCoord p) noexcept;

/// Standardized map value at the fixation pixel. Throws ConstantMap.
double nss_at(const Grid& map, PixelCoord fix);

/// Mean of nss_at over the fixations, standardizing once.
double nss_set(const Grid& map, std::span<const PixelCoord> fixations);

/// Single-positive ROC area with every other pixel as a negative:
///   (#{v < v_f} + 0.5 #{other pixels with v = v_f}) / (N - 1)
double auc_at(const Grid& map, PixelCoord fix);

double auc_set(const Grid& map, std::span<const PixelCoord> fixations);

}  // namespace gazeval
