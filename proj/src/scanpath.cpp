#include "gazeval/scanpath.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <tuple>

#include "gazeval/error.hpp"

namespace gazeval {

namespace {

std::vector<std::string> split_csv_line(std::string line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        fields.push_back(line.substr(start, comma - start));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    for (auto& f : fields) {
        const auto b = f.find_first_not_of(" \t");
        const auto e = f.find_last_not_of(" \t");
        f = b == std::string::npos ? std::string{} : f.substr(b, e - b + 1);
    }
    return fields;
}

double parse_real(const std::string& s, std::size_t line_no) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) {
        throw Error(ErrorCode::SchemaViolation, "line " + std::to_string(line_no) + ": bad number '" + s + "'");
    }
    return v;
}

std::size_t parse_index(const std::string& s, std::size_t line_no) {
    std::size_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || v == 0) {
        throw Error(ErrorCode::SchemaViolation, "line " + std::to_string(line_no) + ": bad fixation_index '" + s + "'");
    }
    return v;
}

double clamp_coord(double v, std::size_t dim, bool strict, const std::string& where) {
    const double hi = static_cast<double>(dim);
    if (v >= 0.0 && v < hi) return v;
    if (strict) throw Error(ErrorCode::OutOfBounds, where);
    return std::clamp(v, 0.0, hi - 1.0);
}

}  // namespace

std::vector<Scanpath> parse_scanpaths(std::istream& csv, const ScanpathParseOptions& options) {
    std::string line;
    if (!std::getline(csv, line)) throw Error(ErrorCode::MissingColumn, "empty scanpath file");
    const auto header = split_csv_line(line);
    const char* required[] = {"image_id", "subject_id", "fixation_index", "x", "y"};
    std::size_t col[5];
    for (int k = 0; k < 5; ++k) {
        const auto it = std::find(header.begin(), header.end(), required[k]);
        if (it == header.end()) throw Error(ErrorCode::MissingColumn, std::string("column '") + required[k] + "'");
        col[k] = static_cast<std::size_t>(it - header.begin());
    }
    const std::size_t min_fields = *std::max_element(std::begin(col), std::end(col)) + 1;

    std::vector<ScanpathRecord> records;
    std::size_t line_no = 1;
    while (std::getline(csv, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        const auto fields = split_csv_line(line);
        if (fields.size() < min_fields) {
            throw Error(ErrorCode::SchemaViolation, "line " + std::to_string(line_no) + ": too few fields");
        }
        ScanpathRecord r{fields[col[0]], fields[col[1]], parse_index(fields[col[2]], line_no),
                         parse_real(fields[col[3]], line_no), parse_real(fields[col[4]], line_no)};
        if (const auto b = options.bounds.find(r.image_id); b != options.bounds.end()) {
            const std::string where = "line " + std::to_string(line_no) + ": fixation outside image " + r.image_id;
            r.x = clamp_coord(r.x, b->second.width, options.strict, where);
            r.y = clamp_coord(r.y, b->second.height, options.strict, where);
        }
        records.push_back(std::move(r));
    }

    std::sort(records.begin(), records.end(), [](const ScanpathRecord& a, const ScanpathRecord& b) {
        return std::tie(a.image_id, a.subject_id, a.fixation_index) <
               std::tie(b.image_id, b.subject_id, b.fixation_index);
    });

    std::vector<Scanpath> out;
    for (const auto& r : records) {
        if (out.empty() || out.back().image_id != r.image_id || out.back().subject_id != r.subject_id) {
            out.push_back(Scanpath{r.image_id, r.subject_id, {}});
        }
        auto& sp = out.back();
        if (r.fixation_index != sp.points.size() + 1) {
            throw Error(ErrorCode::NonContiguousIndices, "image " + r.image_id + ", subject " + r.subject_id +
                                                             ": expected fixation " +
                                                             std::to_string(sp.points.size() + 1) + ", found " +
                                                             std::to_string(r.fixation_index));
        }
        sp.points.push_back({r.x, r.y});
    }
    return out;
}

std::vector<Scanpath> parse_scanpaths(const std::filesystem::path& path, const ScanpathParseOptions& options) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
    return parse_scanpaths(in, options);
}

void write_scanpaths(const std::vector<Scanpath>& scanpaths, std::ostream& out) {
    out << "image_id,subject_id,fixation_index,x,y\n";
    char buf[64];
    for (const auto& sp : scanpaths) {
        for (std::size_t k = 0; k < sp.points.size(); ++k) {
            out << sp.image_id << ',' << sp.subject_id << ',' << (k + 1);
            std::snprintf(buf, sizeof buf, ",%.17g,%.17g\n", sp.points[k].x, sp.points[k].y);
            out << buf;
        }
    }
}

PixelCoord to_working(PixelCoord p, std::size_t factor, Dims working) {
    const double f = static_cast<double>(factor);
    return {std::clamp(p.x / f, 0.0, static_cast<double>(working.width) - 1.0),
            std::clamp(p.y / f, 0.0, static_cast<double>(working.height) - 1.0)};
}

Scanpath to_working(const Scanpath& s, std::size_t factor, Dims working) {
    Scanpath out{s.image_id, s.subject_id, {}};
    out.points.reserve(s.points.size());
    for (const auto& p : s.points) out.points.push_back(to_working(p, factor, working));
    return out;
}

}  // namespace gazeval
