#pragma once

// Raster primitives shared by the prompt, metric and batch pipelines.

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "campro/error.hpp"

namespace campro {

/// Row-major single-channel raster. `Tag` keeps semantically different
/// rasters (intensities, masks, [0,1] maps, unbounded planes) apart.
template <typename T, typename Tag>
class Raster {
public:
    using value_type = T;

    Raster() = default;

    Raster(int width, int height, T fill = T{}) : width_(width), height_(height) {
        check_dims(width, height);
        data_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
    }

    Raster(int width, int height, std::vector<T> data)
        : width_(width), height_(height), data_(std::move(data)) {
        check_dims(width, height);
        if (data_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
            throw ShapeError("raster data length " + std::to_string(data_.size()) +
                             " does not match " + std::to_string(width) + "x" +
                             std::to_string(height));
        }
    }

    [[nodiscard]] int width() const noexcept { return width_; }
    [[nodiscard]] int height() const noexcept { return height_; }
    [[nodiscard]] std::size_t size() const noexcept { return data_.size(); }
    [[nodiscard]] bool empty() const noexcept { return data_.empty(); }

    [[nodiscard]] T at(int x, int y) const { return data_[index(x, y)]; }
    T& at(int x, int y) { return data_[index(x, y)]; }

    [[nodiscard]] std::span<const T> data() const noexcept { return data_; }
    std::span<T> data() noexcept { return data_; }
    [[nodiscard]] const std::vector<T>& values() const noexcept { return data_; }

    [[nodiscard]] std::span<const T> row(int y) const {
        return std::span<const T>(data_).subspan(static_cast<std::size_t>(y) * width_, width_);
    }
    std::span<T> row(int y) {
        return std::span<T>(data_).subspan(static_cast<std::size_t>(y) * width_, width_);
    }

    [[nodiscard]] bool same_shape(const auto& other) const noexcept {
        return width_ == other.width() && height_ == other.height();
    }

    friend bool operator==(const Raster&, const Raster&) = default;

private:
    static void check_dims(int width, int height) {
        if (width < 1 || height < 1) {
            throw ShapeError("raster dimensions must be positive, got " + std::to_string(width) +
                             "x" + std::to_string(height));
        }
    }

    [[nodiscard]] std::size_t index(int x, int y) const noexcept {
        return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
               static_cast<std::size_t>(x);
    }

    int width_ = 0;
    int height_ = 0;
    std::vector<T> data_;
};

struct GrayTag {};
struct MaskTag {};
struct FloatTag {};
struct PlaneTag {};

/// 8-bit intensities.
using GrayImage = Raster<std::uint8_t, GrayTag>;
/// Values are 0 or 1.
using BinaryMask = Raster<std::uint8_t, MaskTag>;
/// Values in [0,1].
using FloatMap = Raster<double, FloatTag>;
/// Unbounded real values (distances, wavelet subbands).
using RealPlane = Raster<double, PlaneTag>;

/// Odd side length of a square structuring element or filter window.
class Kernel {
public:
    explicit Kernel(int size);
    [[nodiscard]] int size() const noexcept { return size_; }
    [[nodiscard]] int radius() const noexcept { return size_ / 2; }
    friend bool operator==(const Kernel&, const Kernel&) = default;

private:
    int size_;
};

enum class BorderMode { Replicate, Zero };

struct CannyParams {
    double sigma = 1.4;
    double low = 50.0;
    double high = 150.0;
};

struct CannyResult {
    BinaryMask edges;
    /// Sobel magnitude of the smoothed image divided by its maximum.
    FloatMap magnitude;
};

/// Squared distances and the nearest set pixel for every pixel.
struct NearestMap {
    int width = 0;
    int height = 0;
    /// -1 everywhere when the mask has no set pixel.
    std::vector<std::int64_t> squared;
    /// Linear index of the nearest set pixel; ties resolve to the lowest
    /// column, then the lowest row. -1 when the mask is empty.
    std::vector<std::int64_t> nearest;
};

BinaryMask dilate(const BinaryMask& mask, Kernel k);
BinaryMask mask_subtract(const BinaryMask& a, const BinaryMask& b);

CannyResult canny(const GrayImage& img, const CannyParams& params = {});

/// Separable Gaussian. The default replicate border keeps constants intact.
template <typename Map>
Map gaussian_blur(const Map& map, int ksize, double sigma,
                  BorderMode border = BorderMode::Replicate);

/// Normalised 1-D Gaussian taps, length ksize.
std::vector<double> gaussian_kernel_1d(int ksize, double sigma);

/// Two-pass lower-envelope squared Euclidean transform with nearest indices.
NearestMap nearest_set_pixel(const BinaryMask& mask);

/// Exact Euclidean distance to the nearest set pixel; +inf everywhere when
/// the mask is empty.
RealPlane distance_transform(const BinaryMask& mask);

std::array<std::uint64_t, 256> histogram(const GrayImage& img);

/// Half-pixel-centre bilinear resampling, rounded to nearest.
GrayImage resize_bilinear(const GrayImage& img, int width, int height);

/// Clips to the [lo_pct, hi_pct] percentile range (linear interpolation
/// between order statistics) then min-max rescales into [0,1].
FloatMap truncate_normalize(const GrayImage& img, double lo_pct = 0.5, double hi_pct = 99.5);

/// Linear-interpolated percentile of sorted values.
double percentile_sorted(std::span<const double> sorted, double pct);

BinaryMask threshold_mask(const GrayImage& img, int threshold);
FloatMap to_float_map(const GrayImage& img);
GrayImage to_gray(const FloatMap& map);

}  // namespace campro
