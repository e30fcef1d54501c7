#include "campro/boundary.hpp"

#include <algorithm>
#include <limits>

namespace campro {

DilatePair::DilatePair(Kernel inner, Kernel outer) : inner_(inner), outer_(outer) {
    if (inner.size() > outer.size()) {
        throw InvalidKernelError("outer dilation must not be smaller than inner dilation");
    }
}

std::string_view to_string(EgemMode mode) noexcept {
    return mode == EgemMode::Binary ? "binary" : "magnitude";
}

EgemMode parse_egem_mode(std::string_view text) {
    if (text == "binary") return EgemMode::Binary;
    if (text == "magnitude") return EgemMode::Magnitude;
    throw InvalidRangeError("unknown egem mode '" + std::string(text) + "'");
}

BinaryMask boundary_band(const BinaryMask& gt, const DilatePair& pair) {
    return dilate(mask_subtract(dilate(gt, pair.inner()), gt), pair.outer());
}

FloatMap egem(const BinaryMask& gt, const GrayImage& img, const DilatePair& pair, EgemMode mode,
              const CannyParams& canny_params) {
    if (!gt.same_shape(img)) {
        throw ShapeError("egem: GT is " + std::to_string(gt.width()) + "x" +
                         std::to_string(gt.height()) + " but image is " +
                         std::to_string(img.width()) + "x" + std::to_string(img.height()));
    }
    const BinaryMask band = boundary_band(gt, pair);
    const CannyResult c = canny(img, canny_params);
    FloatMap out(gt.width(), gt.height());
    auto o = out.data();
    auto b = band.data();
    auto e = c.edges.data();
    auto m = c.magnitude.data();
    for (std::size_t i = 0; i < o.size(); ++i) {
        const double v = static_cast<double>(b[i] * e[i]);
        o[i] = mode == EgemMode::Binary ? v : v * m[i];
    }
    return out;
}

BoundingBox extract_box(const BinaryMask& gt, int jitter) {
    int x0 = std::numeric_limits<int>::max();
    int y0 = std::numeric_limits<int>::max();
    int x1 = -1;
    int y1 = -1;
    for (int y = 0; y < gt.height(); ++y) {
        const auto line = gt.row(y);
        for (int x = 0; x < gt.width(); ++x) {
            if (!line[x]) continue;
            x0 = std::min(x0, x);
            x1 = std::max(x1, x);
            y0 = std::min(y0, y);
            y1 = std::max(y1, y);
        }
    }
    if (x1 < 0) throw EmptyInputError("extract_box: mask has no foreground");
    return {std::max(0, x0 - jitter), std::max(0, y0 - jitter),
            std::min(gt.width() - 1, x1 + jitter), std::min(gt.height() - 1, y1 + jitter)};
}

std::uint8_t dominant_value(const std::array<std::uint64_t, 256>& counts) {
    // max_element returns the first maximum, i.e. the lowest intensity
    const auto it = std::max_element(counts.begin(), counts.end());
    if (*it == 0) throw EmptyInputError("dominant_value: empty histogram");
    return static_cast<std::uint8_t>(it - counts.begin());
}

int inference_threshold(const GrayImage& edge_map, const ThresholdSpec& spec) {
    // no upper clamp: a threshold above 255 simply passes nothing
    return std::max(0, dominant_value(histogram(edge_map)) + spec.offset);
}

FloatMap generate_inference_boundary(const GrayImage& edge_map, const BoundingBox& box,
                                     const FloatMap& gradient, const ThresholdSpec& spec) {
    if (!edge_map.same_shape(gradient)) {
        throw ShapeError("generate_inference_boundary: edge map and gradient differ in shape");
    }
    if (box.x0 < 0 || box.y0 < 0 || box.x1 >= edge_map.width() || box.y1 >= edge_map.height() ||
        box.x0 > box.x1 || box.y0 > box.y1) {
        throw ShapeError("generate_inference_boundary: box outside image bounds");
    }
    const int threshold = inference_threshold(edge_map, spec);
    FloatMap out(edge_map.width(), edge_map.height());
    for (int y = box.y0; y <= box.y1; ++y) {
        for (int x = box.x0; x <= box.x1; ++x) {
            if (edge_map.at(x, y) > threshold) out.at(x, y) = std::clamp(gradient.at(x, y), 0.0, 1.0);
        }
    }
    return out;
}

}  // namespace campro
