#pragma once

// Single-level 2-D Haar transform with the averaging (1/4) normalisation.
//
// Each non-overlapping 2x2 block is read row-major as
//     [[x1, x2],
//      [x3, x4]]
// and produces
//     LL = (x1 + x2 + x3 + x4) / 4
//     LH = (x1 - x2 + x3 - x4) / 4   horizontal detail
//     HL = (x1 + x2 - x3 - x4) / 4   vertical detail
//     HH = (x1 - x2 - x3 + x4) / 4   diagonal detail
// Odd dimensions are padded by replicating the last row/column.

#include <string_view>

#include "campro/raster.hpp"
#include "campro/tensor.hpp"

namespace campro {

enum class Subband { LL, LH, HL, HH };

std::string_view to_string(Subband which) noexcept;
Subband parse_subband(std::string_view text);

struct Subbands {
    RealPlane ll;
    RealPlane lh;
    RealPlane hl;
    RealPlane hh;
    int orig_width = 0;
    int orig_height = 0;
};

Subbands dwt2_haar(const RealPlane& plane);
RealPlane idwt2_haar(const Subbands& sb);
const RealPlane& select_subband(const Subbands& sb, Subband which);

/// Per channel: the chosen subband, nearest-neighbour upsampled by 2 and
/// cropped back to H x W so it can be concatenated with full-size tensors.
Tensor3 frequency_component(const Tensor3& t, Subband which);

/// frequency_component(t, Subband::HH).
Tensor3 diagonal_hf(const Tensor3& t);

RealPlane channel_plane(const Tensor3& t, int c);

}  // namespace campro
