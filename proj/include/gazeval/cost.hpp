#pragma once

#include "gazeval/grid.hpp"
#include "gazeval/params.hpp"

namespace gazeval {

struct SaccadeGeometry {
    double amplitude = 0.0;       // pixels
    double relative_angle = 0.0;  // [0, pi], against the previous saccade
    double absolute_angle = 0.0;  // [0, pi], against the rightward horizontal
};

/// Euclidean saccade length in pixels.
double amplitude(PixelCoord from, PixelCoord to) noexcept;

/// Angle between the saccade prev->cur and the candidate cur->next. 0 for a
/// straight continuation, pi for an exact return. Zero-length saccades on
/// either side give 0. Evaluated as atan2(|a x b|, a . b), which equals the
/// arccos of the normalized dot product and stays accurate near 0 and pi.
double relative_angle(PixelCoord prev, PixelCoord cur, PixelCoord next) noexcept;

/// Angle between cur->next and the +x axis. Upward and downward saccades
/// fold onto the same value. A zero-length saccade gives 0.
double absolute_angle(PixelCoord cur, PixelCoord next) noexcept;

SaccadeGeometry saccade_geometry(PixelCoord prev, PixelCoord cur, PixelCoord next) noexcept;

/// psi0: the amplitude table interpolated linearly between bin midpoints and
/// clamped beyond the outermost midpoints. `degrees` is the amplitude
/// already converted with pixels_per_degree.
double amplitude_value(const CostProfile& profile, double degrees);

/// Per-pixel oculomotor term for the next fixation given the last two:
///   C[x] = psi0(|x - cur| / ppd) + psi1 * rel_angle(prev, cur, x) + psi2 * abs_angle(cur, x)
/// Throws OutOfBoundsFixation when prev or cur lies outside `dims`.
Grid cost_map(Dims dims, PixelCoord prev, PixelCoord cur, const CostProfile& profile);

/// Illustrative placeholder profile shipped with the tool: a penalty that
/// grows with saccade amplitude and with both angles. It is not a measured
/// human profile. Values are scaled for saliency maps normalized to unit sum
/// at roughly 64x48 working resolution.
CostProfile default_cost_profile();

}  // namespace gazeval
