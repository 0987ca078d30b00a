#include "gazeval/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gazeval/error.hpp"

namespace gazeval {

bool contains(Dims d, PixelCoord p) noexcept {
    return std::isfinite(p.x) && std::isfinite(p.y) && p.x >= 0.0 && p.y >= 0.0 &&
           p.x < static_cast<double>(d.width) && p.y < static_cast<double>(d.height);
}

Grid::Grid(Dims dims) : Grid(dims, 0.0) {}

Grid::Grid(Dims dims, double fill) : dims_(dims), values_(dims.size(), fill) {
    if (!std::isfinite(fill)) throw Error(ErrorCode::NonFiniteValue, "grid fill value");
}

Grid::Grid(Dims dims, std::vector<double> values) : dims_(dims), values_(std::move(values)) {
    if (values_.size() != dims_.size()) {
        throw Error(ErrorCode::DimensionMismatch,
                    "expected " + std::to_string(dims_.size()) + " values, got " + std::to_string(values_.size()));
    }
    for (double v : values_) {
        if (!std::isfinite(v)) throw Error(ErrorCode::NonFiniteValue, "grid value");
    }
}

double Grid::min() const { return *std::min_element(values_.begin(), values_.end()); }
double Grid::max() const { return *std::max_element(values_.begin(), values_.end()); }

double Grid::mean() const {
    double sum = 0.0;
    for (double v : values_) sum += v;
    return sum / static_cast<double>(values_.size());
}

double sample_bilinear(const Grid& g, double x, double y) {
    const double max_x = static_cast<double>(g.width() - 1);
    const double max_y = static_cast<double>(g.height() - 1);
    x = std::clamp(x, 0.0, max_x);
    y = std::clamp(y, 0.0, max_y);
    const auto x0 = static_cast<std::size_t>(std::floor(x));
    const auto y0 = static_cast<std::size_t>(std::floor(y));
    const std::size_t x1 = std::min(x0 + 1, g.width() - 1);
    const std::size_t y1 = std::min(y0 + 1, g.height() - 1);
    const double fx = x - static_cast<double>(x0);
    const double fy = y - static_cast<double>(y0);
    const double top = g(x0, y0) + fx * (g(x1, y0) - g(x0, y0));
    const double bottom = g(x0, y1) + fx * (g(x1, y1) - g(x0, y1));
    return top + fy * (bottom - top);
}

Grid downscale_bilinear(const Grid& g, std::size_t factor) {
    if (factor == 0) throw Error(ErrorCode::ZeroDimension, "downscale factor must be >= 1");
    const Dims out_dims{g.width() / factor, g.height() / factor};
    if (out_dims.width == 0 || out_dims.height == 0) {
        throw Error(ErrorCode::ZeroDimension, "downscaled grid would be empty");
    }
    if (factor == 1) return g;

    const double f = static_cast<double>(factor);
    Grid out(out_dims);
    for (std::size_t j = 0; j < out_dims.height; ++j) {
        const double sy = (static_cast<double>(j) + 0.5) * f - 0.5;
        for (std::size_t i = 0; i < out_dims.width; ++i) {
            const double sx = (static_cast<double>(i) + 0.5) * f - 0.5;
            out(i, j) = sample_bilinear(g, sx, sy);
        }
    }
    return out;
}

std::pair<double, double> mean_std(const Grid& g) {
    const double mu = g.mean();
    double ss = 0.0;
    for (double v : g.values()) {
        const double d = v - mu;
        ss += d * d;
    }
    return {mu, std::sqrt(ss / static_cast<double>(g.size()))};
}

Grid standardize(const Grid& g) {
    if (g.size() < 2) throw Error(ErrorCode::ConstantMap, "standardization needs at least 2 pixels");
    const auto [mu, sd] = mean_std(g);
    if (!(sd > 0.0)) throw Error(ErrorCode::ConstantMap, "map has zero variance");
    std::vector<double> out(g.size());
    const auto in = g.values();
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = (in[k] - mu) / sd;
    return Grid(g.dims(), std::move(out));
}

PixelCoord argmax(const Grid& g) {
    const auto v = g.values();
    // max_element returns the first maximal element, i.e. the row-major tie-break.
    const auto idx = static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
    return {static_cast<double>(idx % g.width()), static_cast<double>(idx / g.width())};
}

Grid lincomb(std::span<const Term> terms) {
    if (terms.empty()) throw Error(ErrorCode::DimensionMismatch, "lincomb needs at least one term");
    const Dims dims = terms.front().grid->dims();
    for (const auto& t : terms) {
        if (t.grid->dims() != dims) throw Error(ErrorCode::DimensionMismatch, "lincomb operands differ in size");
    }
    std::vector<double> out(dims.size(), 0.0);
    for (std::size_t k = 0; k < out.size(); ++k) {
        double acc = terms.front().coefficient * terms.front().grid->values()[k];
        for (std::size_t t = 1; t < terms.size(); ++t) acc += terms[t].coefficient * terms[t].grid->values()[k];
        out[k] = acc;
    }
    return Grid(dims, std::move(out));
}

}  // namespace gazeval
