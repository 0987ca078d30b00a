#include "gazeval/raster.hpp"

#include <bit>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <vector>

#include "gazeval/error.hpp"

namespace gazeval {

namespace {

constexpr char kMagic[] = "SMR1";

static_assert(std::numeric_limits<float>::is_iec559);

std::uint32_t to_le(std::uint32_t v) {
    if constexpr (std::endian::native == std::endian::big) {
        return ((v & 0xFFu) << 24) | ((v & 0xFF00u) << 8) | ((v >> 8) & 0xFF00u) | (v >> 24);
    }
    return v;
}

std::ifstream open_binary(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
    return in;
}

// Reads one whitespace-delimited PGM header token, skipping '#' comments.
std::string pgm_token(std::istream& in) {
    std::string tok;
    int c = in.get();
    while (c != EOF) {
        if (c == '#') {
            while (c != EOF && c != '\n') c = in.get();
        } else if (std::isspace(c)) {
            if (!tok.empty()) break;
        } else {
            tok.push_back(static_cast<char>(c));
        }
        c = in.get();
    }
    return tok;
}

std::size_t parse_positive(const std::string& tok, ErrorCode code, const char* what) {
    if (tok.empty() || tok.find_first_not_of("0123456789") != std::string::npos || tok.size() > 9) {
        throw Error(code, std::string("bad ") + what + " '" + tok + "'");
    }
    const auto v = static_cast<std::size_t>(std::stoul(tok));
    if (v == 0) throw Error(code, std::string(what) + " must be positive");
    return v;
}

}  // namespace

void write_raster(const Grid& g, std::ostream& out) {
    out << kMagic << '\n' << g.width() << ' ' << g.height() << '\n';
    std::vector<std::uint32_t> payload(g.size());
    const auto values = g.values();
    for (std::size_t k = 0; k < payload.size(); ++k) {
        const auto f = static_cast<float>(values[k]);
        if (!std::isfinite(f)) throw Error(ErrorCode::NonFiniteValue, "value overflows binary32 at " + std::to_string(k));
        payload[k] = to_le(std::bit_cast<std::uint32_t>(f));
    }
    out.write(reinterpret_cast<const char*>(payload.data()),
              static_cast<std::streamsize>(payload.size() * sizeof(std::uint32_t)));
    if (!out) throw Error(ErrorCode::Io, "raster write failed");
}

void write_raster(const Grid& g, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, "cannot create " + path.string());
    write_raster(g, out);
}

std::string encode_raster(const Grid& g) {
    std::ostringstream out(std::ios::binary);
    write_raster(g, out);
    return std::move(out).str();
}

Grid read_raster(std::istream& in) {
    std::string magic;
    if (!std::getline(in, magic) || magic != kMagic) throw Error(ErrorCode::MalformedHeader, "missing SMR1 magic");
    std::string dims_line;
    if (!std::getline(in, dims_line)) throw Error(ErrorCode::MalformedHeader, "missing dimension line");
    std::istringstream ds(dims_line);
    std::string w_tok, h_tok, extra;
    if (!(ds >> w_tok >> h_tok) || (ds >> extra)) throw Error(ErrorCode::MalformedHeader, "bad dimension line");
    const Dims dims{parse_positive(w_tok, ErrorCode::MalformedHeader, "width"),
                    parse_positive(h_tok, ErrorCode::MalformedHeader, "height")};

    std::vector<std::uint32_t> payload(dims.size());
    in.read(reinterpret_cast<char*>(payload.data()),
            static_cast<std::streamsize>(payload.size() * sizeof(std::uint32_t)));
    if (static_cast<std::size_t>(in.gcount()) != payload.size() * sizeof(std::uint32_t)) {
        throw Error(ErrorCode::TruncatedPayload, "expected " + std::to_string(dims.size()) + " values, got " +
                                                     std::to_string(in.gcount() / sizeof(std::uint32_t)));
    }
    if (in.peek() != std::char_traits<char>::eof()) throw Error(ErrorCode::MalformedHeader, "trailing bytes after payload");

    std::vector<double> values(payload.size());
    for (std::size_t k = 0; k < payload.size(); ++k) {
        const float f = std::bit_cast<float>(to_le(payload[k]));
        if (!std::isfinite(f)) throw Error(ErrorCode::NonFiniteValue, "payload value " + std::to_string(k));
        values[k] = f;
    }
    return Grid(dims, std::move(values));
}

Grid read_raster(const std::filesystem::path& path) {
    auto in = open_binary(path);
    return read_raster(in);
}

Grid decode_raster(const std::string& bytes) {
    std::istringstream in(bytes, std::ios::binary);
    return read_raster(in);
}

Grid import_pgm(std::istream& in) {
    if (pgm_token(in) != "P5") throw Error(ErrorCode::UnsupportedFormat, "only binary P5 PGM is supported");
    const std::size_t width = parse_positive(pgm_token(in), ErrorCode::UnsupportedFormat, "width");
    const std::size_t height = parse_positive(pgm_token(in), ErrorCode::UnsupportedFormat, "height");
    const std::size_t maxval = parse_positive(pgm_token(in), ErrorCode::UnsupportedFormat, "maxval");
    if (maxval > 65535) throw Error(ErrorCode::UnsupportedFormat, "maxval above 65535");

    const std::size_t bytes_per_sample = maxval < 256 ? 1 : 2;
    const std::size_t n = width * height;
    std::vector<unsigned char> raw(n * bytes_per_sample);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (static_cast<std::size_t>(in.gcount()) != raw.size()) throw Error(ErrorCode::UnsupportedFormat, "truncated PGM data");

    std::vector<double> values(n);
    const double scale = static_cast<double>(maxval);
    for (std::size_t k = 0; k < n; ++k) {
        // 16-bit samples are big-endian.
        const unsigned p = bytes_per_sample == 1 ? raw[k] : (unsigned{raw[2 * k]} << 8) | raw[2 * k + 1];
        if (p > maxval) throw Error(ErrorCode::UnsupportedFormat, "sample exceeds maxval");
        values[k] = static_cast<double>(p) / scale;
    }
    return Grid(Dims{width, height}, std::move(values));
}

Grid import_pgm(const std::filesystem::path& path) {
    auto in = open_binary(path);
    return import_pgm(in);
}

Grid load_map(const std::filesystem::path& path) {
    auto ext = path.extension().string();
    for (auto& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return ext == ".pgm" ? import_pgm(path) : read_raster(path);
}

}  // namespace gazeval
