#include "campro/wavelet.hpp"

#include <algorithm>

namespace campro {

std::string_view to_string(Subband which) noexcept {
    switch (which) {
        case Subband::LL: return "LL";
        case Subband::LH: return "LH";
        case Subband::HL: return "HL";
        case Subband::HH: return "HH";
    }
    return "?";
}

Subband parse_subband(std::string_view text) {
    if (text == "LL") return Subband::LL;
    if (text == "LH") return Subband::LH;
    if (text == "HL") return Subband::HL;
    if (text == "HH") return Subband::HH;
    throw InvalidRangeError("unknown subband '" + std::string(text) + "'");
}

Subbands dwt2_haar(const RealPlane& plane) {
    const int w = plane.width();
    const int h = plane.height();
    if (w < 2 || h < 2) {
        throw ShapeError("dwt2_haar needs at least 2x2, got " + std::to_string(w) + "x" +
                         std::to_string(h));
    }
    const int hw = (w + 1) / 2;
    const int hh = (h + 1) / 2;
    Subbands sb{RealPlane(hw, hh), RealPlane(hw, hh), RealPlane(hw, hh), RealPlane(hw, hh), w, h};
    for (int by = 0; by < hh; ++by) {
        const int y0 = 2 * by;
        const int y1 = std::min(y0 + 1, h - 1);
        for (int bx = 0; bx < hw; ++bx) {
            const int x0 = 2 * bx;
            const int x1r = std::min(x0 + 1, w - 1);
            const double a = plane.at(x0, y0);
            const double b = plane.at(x1r, y0);
            const double c = plane.at(x0, y1);
            const double d = plane.at(x1r, y1);
            sb.ll.at(bx, by) = (a + b + c + d) / 4.0;
            // grouped so that row, column and constant patterns cancel exactly
            sb.lh.at(bx, by) = ((a - b) + (c - d)) / 4.0;
            sb.hl.at(bx, by) = ((a + b) - (c + d)) / 4.0;
            sb.hh.at(bx, by) = ((a - b) - (c - d)) / 4.0;
        }
    }
    return sb;
}

RealPlane idwt2_haar(const Subbands& sb) {
    const int hw = sb.ll.width();
    const int hh = sb.ll.height();
    for (const RealPlane* p : {&sb.lh, &sb.hl, &sb.hh}) {
        if (!p->same_shape(sb.ll)) throw ShapeError("idwt2_haar: subbands differ in shape");
    }
    const int w = sb.orig_width > 0 ? sb.orig_width : 2 * hw;
    const int h = sb.orig_height > 0 ? sb.orig_height : 2 * hh;
    if ((w + 1) / 2 != hw || (h + 1) / 2 != hh) {
        throw ShapeError("idwt2_haar: original size inconsistent with subband size");
    }
    RealPlane out(w, h);
    for (int by = 0; by < hh; ++by) {
        for (int bx = 0; bx < hw; ++bx) {
            const double ll = sb.ll.at(bx, by);
            const double lh = sb.lh.at(bx, by);
            const double hl = sb.hl.at(bx, by);
            const double d = sb.hh.at(bx, by);
            const double block[2][2] = {{ll + lh + hl + d, ll - lh + hl - d},
                                        {ll + lh - hl - d, ll - lh - hl + d}};
            for (int dy = 0; dy < 2; ++dy) {
                for (int dx = 0; dx < 2; ++dx) {
                    const int x = 2 * bx + dx;
                    const int y = 2 * by + dy;
                    if (x < w && y < h) out.at(x, y) = block[dy][dx];
                }
            }
        }
    }
    return out;
}

const RealPlane& select_subband(const Subbands& sb, Subband which) {
    switch (which) {
        case Subband::LL: return sb.ll;
        case Subband::LH: return sb.lh;
        case Subband::HL: return sb.hl;
        case Subband::HH: return sb.hh;
    }
    throw InvalidRangeError("invalid subband selector");
}

RealPlane channel_plane(const Tensor3& t, int c) {
    const auto src = t.channel(c);
    return RealPlane(t.width(), t.height(), std::vector<double>(src.begin(), src.end()));
}

Tensor3 frequency_component(const Tensor3& t, Subband which) {
    if (t.height() < 2 || t.width() < 2) {
        throw ShapeError("frequency_component needs H,W >= 2, got " + t.shape_string());
    }
    Tensor3 out(t.channels(), t.height(), t.width());
    for (int c = 0; c < t.channels(); ++c) {
        const Subbands sb = dwt2_haar(channel_plane(t, c));
        const RealPlane& band = select_subband(sb, which);
        for (int y = 0; y < t.height(); ++y) {
            for (int x = 0; x < t.width(); ++x) out.at(c, y, x) = band.at(x / 2, y / 2);
        }
    }
    return out;
}

Tensor3 diagonal_hf(const Tensor3& t) { return frequency_component(t, Subband::HH); }

}  // namespace campro
