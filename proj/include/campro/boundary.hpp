#pragma once

// Prompt generation: the gradient-boundary prompt built from GT and image,
// box prompts, and the inference-time boundary built from an external edge map.

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

#include "campro/raster.hpp"

namespace campro {

/// Inner (first) and outer (second) dilation of the boundary band.
class DilatePair {
public:
    DilatePair(Kernel inner, Kernel outer);
    [[nodiscard]] Kernel inner() const noexcept { return inner_; }
    [[nodiscard]] Kernel outer() const noexcept { return outer_; }
    friend bool operator==(const DilatePair&, const DilatePair&) = default;

private:
    Kernel inner_;
    Kernel outer_;
};

/// Inclusive pixel coordinates.
struct BoundingBox {
    int x0 = 0;
    int y0 = 0;
    int x1 = 0;
    int y1 = 0;

    [[nodiscard]] bool contains(int x, int y) const noexcept {
        return x >= x0 && x <= x1 && y >= y0 && y <= y1;
    }
    friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

/// Edge-map binarisation: pass where value > dominant + offset.
struct ThresholdSpec {
    int offset = 15;
};

enum class EgemMode { Binary, Magnitude };

std::string_view to_string(EgemMode mode) noexcept;
EgemMode parse_egem_mode(std::string_view text);

/// The band dilate(dilate(gt, inner) - gt, outer).
BinaryMask boundary_band(const BinaryMask& gt, const DilatePair& pair);

/// Band times Canny edges (binary mode) or band times edges times the
/// normalised Sobel magnitude (magnitude mode).
FloatMap egem(const BinaryMask& gt, const GrayImage& img, const DilatePair& pair,
              EgemMode mode = EgemMode::Binary, const CannyParams& canny_params = {});

/// Tight box around the set pixels grown by `jitter` on every side and
/// clamped to the image. Throws EmptyInputError on an empty mask.
BoundingBox extract_box(const BinaryMask& gt, int jitter = 0);

/// Most populated intensity; the lowest intensity wins ties.
std::uint8_t dominant_value(const std::array<std::uint64_t, 256>& counts);

/// Binarisation threshold: dominant_value + offset, floored at 0.
int inference_threshold(const GrayImage& edge_map, const ThresholdSpec& spec);

FloatMap generate_inference_boundary(const GrayImage& edge_map, const BoundingBox& box,
                                     const FloatMap& gradient, const ThresholdSpec& spec = {});

}  // namespace campro
