#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "gazeval/grid.hpp"
#include "gazeval/scanpath.hpp"

namespace gazeval {

struct ManifestEntry {
    std::string image_id;
    std::filesystem::path saliency_path;
    std::size_t image_width = 0;
    std::size_t image_height = 0;
    std::filesystem::path scanpath_source;

    friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

struct DatasetManifest {
    std::size_t downscale_factor = 1;
    std::vector<ManifestEntry> entries;
    /// Relative paths in entries resolve against this directory.
    std::filesystem::path base_dir;

    std::filesystem::path resolve(const std::filesystem::path& p) const;
};

/// Throws SchemaViolation on a malformed document or duplicate image ids.
DatasetManifest manifest_from_json(const nlohmann::json& j, std::filesystem::path base_dir = {});
nlohmann::json to_json(const DatasetManifest& m);
DatasetManifest load_manifest(const std::filesystem::path& path);
void save_manifest(const DatasetManifest& m, const std::filesystem::path& path);

/// A single image at working resolution with its observers' scanpaths.
struct ImageData {
    std::string image_id;
    std::shared_ptr<const Grid> saliency;
    std::vector<Scanpath> scanpaths;
};

struct Dataset {
    std::vector<ImageData> images;

    std::size_t scanpath_count() const;
    std::size_t fixation_count() const;
};

/// Loads every saliency map and scanpath at working resolution. Maps stored
/// at the original image size are bilinearly downscaled; maps already at
/// floor(size / factor) are used as-is. Fixations are divided by the factor
/// and clamped, or rejected when `strict` is set.
Dataset load_dataset(const DatasetManifest& manifest, bool strict = false);

}  // namespace gazeval
