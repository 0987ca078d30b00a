#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <random>

#include "gazeval/dataset.hpp"
#include "gazeval/grid.hpp"
#include "gazeval/params.hpp"

namespace gazeval {

/// Sum of a few isotropic Gaussian blobs on a small floor, scaled to sum to 1.
Grid random_blob_saliency(Dims dims, std::mt19937_64& rng, std::size_t blobs = 4);

struct SyntheticConfig {
    std::size_t images = 200;
    std::size_t scanpaths_per_image = 10;
    std::size_t length = 8;
    Dims dims{64, 48};
    std::size_t blobs = 4;
    /// Fixations are drawn with probability proportional to
    /// exp(beta * standardized value map).
    double beta = 0.75;
    std::uint64_t seed = 1;
};

/// Scanpaths sampled from the model itself, so the generating parameters are
/// known. The first fixation is drawn from the saliency map alone.
Dataset generate_synthetic(const SyntheticConfig& config, const ModelParams& params, const CostProfile& profile);

/// Writes maps (SMR), scanpaths.csv and manifest.json under `dir`; returns
/// the manifest path. Downscale factor 1.
std::filesystem::path write_dataset(const Dataset& dataset, const std::filesystem::path& dir);

}  // namespace gazeval
