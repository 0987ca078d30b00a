#include "gazeval/dataset.hpp"

#include <map>
#include <set>

#include "gazeval/error.hpp"
#include "gazeval/params.hpp"
#include "gazeval/raster.hpp"

namespace gazeval {

using nlohmann::json;

std::filesystem::path DatasetManifest::resolve(const std::filesystem::path& p) const {
    return p.is_absolute() || base_dir.empty() ? p : base_dir / p;
}

namespace {

std::string required_string(const json& j, const char* key) {
    if (!j.contains(key) || !j[key].is_string()) {
        throw Error(ErrorCode::SchemaViolation, std::string("manifest entry needs string '") + key + "'");
    }
    return j[key].get<std::string>();
}

std::size_t required_positive(const json& j, const char* key) {
    if (!j.contains(key) || !j[key].is_number_integer() || j[key].get<long long>() <= 0) {
        throw Error(ErrorCode::SchemaViolation, std::string("'") + key + "' must be a positive integer");
    }
    return j[key].get<std::size_t>();
}

}  // namespace

DatasetManifest manifest_from_json(const json& j, std::filesystem::path base_dir) {
    if (!j.is_object()) throw Error(ErrorCode::SchemaViolation, "manifest must be an object");
    DatasetManifest m;
    m.base_dir = std::move(base_dir);
    m.downscale_factor = required_positive(j, "downscale_factor");
    if (!j.contains("entries") || !j["entries"].is_array()) {
        throw Error(ErrorCode::SchemaViolation, "manifest needs an 'entries' array");
    }
    std::set<std::string> seen;
    for (const auto& e : j["entries"]) {
        ManifestEntry entry{required_string(e, "image_id"), required_string(e, "saliency_path"),
                            required_positive(e, "image_width"), required_positive(e, "image_height"),
                            required_string(e, "scanpath_source")};
        if (!seen.insert(entry.image_id).second) {
            throw Error(ErrorCode::SchemaViolation, "duplicate image_id '" + entry.image_id + "'");
        }
        m.entries.push_back(std::move(entry));
    }
    return m;
}

json to_json(const DatasetManifest& m) {
    json entries = json::array();
    for (const auto& e : m.entries) {
        entries.push_back({{"image_id", e.image_id},
                           {"saliency_path", e.saliency_path.generic_string()},
                           {"image_width", e.image_width},
                           {"image_height", e.image_height},
                           {"scanpath_source", e.scanpath_source.generic_string()}});
    }
    return {{"downscale_factor", m.downscale_factor}, {"entries", std::move(entries)}};
}

DatasetManifest load_manifest(const std::filesystem::path& path) {
    return manifest_from_json(read_json_file(path), path.parent_path());
}

void save_manifest(const DatasetManifest& m, const std::filesystem::path& path) {
    write_text_file(path, dump_json(to_json(m)) + "\n");
}

std::size_t Dataset::scanpath_count() const {
    std::size_t n = 0;
    for (const auto& img : images) n += img.scanpaths.size();
    return n;
}

std::size_t Dataset::fixation_count() const {
    std::size_t n = 0;
    for (const auto& img : images) {
        for (const auto& sp : img.scanpaths) n += sp.points.size();
    }
    return n;
}

Dataset load_dataset(const DatasetManifest& manifest, bool strict) {
    if (manifest.entries.empty()) throw Error(ErrorCode::EmptyDataset, "manifest has no entries");
    const std::size_t f = manifest.downscale_factor;

    // Scanpath files are often shared between entries; parse each once.
    ScanpathParseOptions options;
    options.strict = strict;
    for (const auto& e : manifest.entries) options.bounds[e.image_id] = Dims{e.image_width, e.image_height};
    std::map<std::filesystem::path, std::map<std::string, std::vector<Scanpath>>> by_source;
    for (const auto& e : manifest.entries) {
        const auto src = manifest.resolve(e.scanpath_source);
        if (by_source.contains(src)) continue;
        auto& bucket = by_source[src];
        for (auto& sp : parse_scanpaths(src, options)) bucket[sp.image_id].push_back(std::move(sp));
    }

    Dataset ds;
    ds.images.reserve(manifest.entries.size());
    for (const auto& e : manifest.entries) {
        const Grid raw = load_map(manifest.resolve(e.saliency_path));
        const Dims working{e.image_width / f, e.image_height / f};
        Grid saliency;
        if (raw.dims() == Dims{e.image_width, e.image_height}) {
            saliency = downscale_bilinear(raw, f);
        } else if (raw.dims() == working) {
            saliency = raw;
        } else {
            throw Error(ErrorCode::DimensionMismatch,
                        "saliency map for '" + e.image_id + "' matches neither the image size nor the working size");
        }
        ImageData img{e.image_id, std::make_shared<const Grid>(std::move(saliency)), {}};
        for (const auto& sp : by_source[manifest.resolve(e.scanpath_source)][e.image_id]) {
            img.scanpaths.push_back(to_working(sp, f, working));
        }
        ds.images.push_back(std::move(img));
    }
    return ds;
}

}  // namespace gazeval
