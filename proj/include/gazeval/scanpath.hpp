#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "gazeval/grid.hpp"

namespace gazeval {

struct ScanpathRecord {
    std::string image_id;
    std::string subject_id;
    std::size_t fixation_index = 0;  // 1-based ordinal position
    double x = 0.0;
    double y = 0.0;
};

/// One observer's fixation sequence on one image; points[k] is fixation k+1.
struct Scanpath {
    std::string image_id;
    std::string subject_id;
    std::vector<PixelCoord> points;

    friend bool operator==(const Scanpath&, const Scanpath&) = default;
};

struct ScanpathParseOptions {
    /// Image bounds (original resolution) keyed by image_id. Records of
    /// images listed here are clamped into [0, dim-1], or rejected with
    /// OutOfBounds when `strict` is set.
    std::map<std::string, Dims> bounds;
    bool strict = false;
};

/// Parses `image_id,subject_id,fixation_index,x,y` CSV (columns located by
/// header name, extra columns ignored, LF or CRLF). Output is sorted by
/// (image_id, subject_id) so row order in the file does not matter.
/// Throws MissingColumn, NonContiguousIndices, OutOfBounds, SchemaViolation.
std::vector<Scanpath> parse_scanpaths(std::istream& csv, const ScanpathParseOptions& options = {});
std::vector<Scanpath> parse_scanpaths(const std::filesystem::path& path, const ScanpathParseOptions& options = {});

void write_scanpaths(const std::vector<Scanpath>& scanpaths, std::ostream& out);

/// Maps an original-resolution coordinate to working resolution: divide by
/// the factor, then clamp into [0, dim-1].
PixelCoord to_working(PixelCoord p, std::size_t factor, Dims working);
Scanpath to_working(const Scanpath& s, std::size_t factor, Dims working);

}  // namespace gazeval
