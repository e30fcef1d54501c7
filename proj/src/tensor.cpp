#include "campro/tensor.hpp"

#include <algorithm>
#include <cmath>

namespace campro {

namespace {
void check_shape(int c, int h, int w) {
    if (c < 0 || h < 1 || w < 1) {
        throw ShapeError("invalid tensor shape (" + std::to_string(c) + "," + std::to_string(h) +
                         "," + std::to_string(w) + ")");
    }
}
}  // namespace

Tensor3::Tensor3(int channels, int height, int width, double fill)
    : channels_(channels), height_(height), width_(width) {
    check_shape(channels, height, width);
    data_.assign(static_cast<std::size_t>(channels) * plane_size(), fill);
}

Tensor3::Tensor3(int channels, int height, int width, std::vector<double> data)
    : channels_(channels), height_(height), width_(width), data_(std::move(data)) {
    check_shape(channels, height, width);
    if (data_.size() != static_cast<std::size_t>(channels) * plane_size()) {
        throw ShapeError("tensor data length " + std::to_string(data_.size()) +
                         " does not match shape " + shape_string());
    }
}

Tensor3 Tensor3::slice_channels(int begin, int end) const {
    if (begin < 0 || end > channels_ || begin > end) {
        throw ShapeError("channel slice [" + std::to_string(begin) + "," + std::to_string(end) +
                         ") out of range for " + shape_string());
    }
    std::vector<double> out(data_.begin() + static_cast<std::ptrdiff_t>(begin * plane_size()),
                            data_.begin() + static_cast<std::ptrdiff_t>(end * plane_size()));
    return Tensor3(end - begin, height_, width_, std::move(out));
}

bool Tensor3::all_finite() const noexcept {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

std::string Tensor3::shape_string() const {
    return "(" + std::to_string(channels_) + "," + std::to_string(height_) + "," +
           std::to_string(width_) + ")";
}

}  // namespace campro
