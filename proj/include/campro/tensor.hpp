#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "campro/error.hpp"

namespace campro {

/// C x H x W real tensor, channel-major then row-major. Zero channels is a
/// valid (empty) tensor; spatial dimensions must be positive.
class Tensor3 {
public:
    Tensor3() = default;
    Tensor3(int channels, int height, int width, double fill = 0.0);
    Tensor3(int channels, int height, int width, std::vector<double> data);

    [[nodiscard]] int channels() const noexcept { return channels_; }
    [[nodiscard]] int height() const noexcept { return height_; }
    [[nodiscard]] int width() const noexcept { return width_; }
    [[nodiscard]] std::size_t plane_size() const noexcept {
        return static_cast<std::size_t>(height_) * static_cast<std::size_t>(width_);
    }
    [[nodiscard]] std::size_t size() const noexcept { return data_.size(); }

    [[nodiscard]] double at(int c, int y, int x) const { return data_[index(c, y, x)]; }
    double& at(int c, int y, int x) { return data_[index(c, y, x)]; }

    [[nodiscard]] std::span<const double> data() const noexcept { return data_; }
    std::span<double> data() noexcept { return data_; }
    [[nodiscard]] std::span<const double> channel(int c) const {
        return std::span<const double>(data_).subspan(c * plane_size(), plane_size());
    }
    std::span<double> channel(int c) {
        return std::span<double>(data_).subspan(c * plane_size(), plane_size());
    }

    /// Channels [begin, end) as a new tensor.
    [[nodiscard]] Tensor3 slice_channels(int begin, int end) const;

    [[nodiscard]] bool all_finite() const noexcept;
    [[nodiscard]] std::string shape_string() const;

    friend bool operator==(const Tensor3&, const Tensor3&) = default;

private:
    [[nodiscard]] std::size_t index(int c, int y, int x) const noexcept {
        return (static_cast<std::size_t>(c) * height_ + y) * width_ + x;
    }

    int channels_ = 0;
    int height_ = 0;
    int width_ = 0;
    std::vector<double> data_;
};

}  // namespace campro
