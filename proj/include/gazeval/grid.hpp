#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace gazeval {

/// Position in grid coordinates. Pixel (i, j) has its center at (i, j);
/// x grows rightward, y grows downward.
struct PixelCoord {
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const PixelCoord&, const PixelCoord&) = default;
};

struct Dims {
    std::size_t width = 0;
    std::size_t height = 0;

    std::size_t size() const noexcept { return width * height; }
    friend bool operator==(const Dims&, const Dims&) = default;
};

/// True when floor(p) addresses a pixel of `d`.
bool contains(Dims d, PixelCoord p) noexcept;

/// Dense row-major raster of finite doubles.
class Grid {
public:
    Grid() = default;
    /// Zero-filled grid.
    explicit Grid(Dims dims);
    Grid(Dims dims, double fill);
    /// Throws DimensionMismatch on length mismatch and NonFiniteValue on NaN/Inf.
    Grid(Dims dims, std::vector<double> values);

    std::size_t width() const noexcept { return dims_.width; }
    std::size_t height() const noexcept { return dims_.height; }
    Dims dims() const noexcept { return dims_; }
    std::size_t size() const noexcept { return values_.size(); }
    bool empty() const noexcept { return values_.empty(); }

    double operator()(std::size_t x, std::size_t y) const noexcept { return values_[y * dims_.width + x]; }
    double& operator()(std::size_t x, std::size_t y) noexcept { return values_[y * dims_.width + x]; }

    std::span<const double> values() const noexcept { return values_; }
    std::span<double> values() noexcept { return values_; }

    double min() const;
    double max() const;
    double mean() const;

    friend bool operator==(const Grid&, const Grid&) = default;

private:
    Dims dims_{};
    std::vector<double> values_;
};

/// Output pixel (i, j) samples the source at ((i+0.5)f-0.5, (j+0.5)f-0.5),
/// clamped to the border. Output dims use floor division.
Grid downscale_bilinear(const Grid& g, std::size_t factor);

/// Bilinear sample at a real-valued position, clamped to the border.
double sample_bilinear(const Grid& g, double x, double y);

/// (g - mean) / population std. Throws ConstantMap when std is zero.
Grid standardize(const Grid& g);

/// Mean and population standard deviation (two-pass).
std::pair<double, double> mean_std(const Grid& g);

/// Coordinate of the maximum; ties go to the smallest row-major index.
PixelCoord argmax(const Grid& g);

struct Term {
    double coefficient;
    const Grid* grid;
};

/// Pointwise sum of coefficient * grid, accumulated in term order.
Grid lincomb(std::span<const Term> terms);

}  // namespace gazeval
