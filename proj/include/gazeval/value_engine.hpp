#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

#include "gazeval/grid.hpp"
#include "gazeval/params.hpp"

namespace gazeval {

/// Everything the next-fixation value map depends on: the image (through
/// its saliency map), the fixations so far and the model parameters.
struct PredictionContext {
    std::shared_ptr<const Grid> saliency;
    std::vector<PixelCoord> history;  // x_0 .. x_t, working resolution
    ModelParams params;
    CostProfile profile;

    Dims dims() const { return saliency->dims(); }
};

/// The assumed fixation before image onset: the middle of the grid.
PixelCoord center_prior(Dims dims) noexcept;

/// Component maps of one value-map evaluation. With an empty history the
/// cost and exploration maps are zero and value equals saliency.
struct ValueMaps {
    Grid cost;
    Grid exploration;
    Grid value;
};

/// Throws OutOfBoundsFixation, NonPositiveSigma, SchemaViolation.
ValueMaps compute_maps(const PredictionContext& ctx);

/// V = w0 S + w1 C + w2 E. The cost term uses the last two fixations, with
/// the center prior standing in for the fixation before the first one.
Grid value_map(const PredictionContext& ctx);

/// Greedy one-step policy: argmax of the value map.
PixelCoord predict_next(const PredictionContext& ctx);

enum class NStepMode { Truncate, Rollout };

std::string_view to_string(NStepMode mode) noexcept;
NStepMode parse_nstep_mode(std::string_view text);

/// Context whose value map scores fixation `target_index` (1-based) of
/// `scanpath` n steps ahead. Truncate keeps the first target_index - n real
/// fixations; rollout then appends n - 1 greedy predictions.
/// Throws InsufficientHistory.
PredictionContext nstep_context(std::span<const PixelCoord> scanpath, std::size_t target_index, std::size_t n,
                                NStepMode mode, const PredictionContext& base);

}  // namespace gazeval
