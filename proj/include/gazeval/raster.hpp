#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "gazeval/grid.hpp"

namespace gazeval {

// SMR raster layout:
//   "SMR1\n"
//   "<width> <height>\n"
//   width*height little-endian IEEE-754 binary32 values, row-major from top-left.
// Values narrow to float32 on write and widen back to double on read.

void write_raster(const Grid& g, std::ostream& out);
void write_raster(const Grid& g, const std::filesystem::path& path);
std::string encode_raster(const Grid& g);

/// Throws MalformedHeader, TruncatedPayload or NonFiniteValue.
Grid read_raster(std::istream& in);
Grid read_raster(const std::filesystem::path& path);
Grid decode_raster(const std::string& bytes);

/// Binary 8- or 16-bit grayscale PGM (P5); pixel p maps to p / maxval.
Grid import_pgm(std::istream& in);
Grid import_pgm(const std::filesystem::path& path);

/// Picks the PGM importer for a .pgm extension and the SMR reader otherwise.
Grid load_map(const std::filesystem::path& path);

}  // namespace gazeval
