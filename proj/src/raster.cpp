#include "campro/raster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace campro {

Kernel::Kernel(int size) : size_(size) {
    if (size < 1 || size % 2 == 0) {
        throw InvalidKernelError("kernel size must be a positive odd integer, got " +
                                 std::to_string(size));
    }
}

namespace {

void require_same_shape(const auto& a, const auto& b, const char* what) {
    if (!a.same_shape(b)) {
        throw ShapeError(std::string(what) + ": shape mismatch " + std::to_string(a.width()) +
                         "x" + std::to_string(a.height()) + " vs " +
                         std::to_string(b.width()) + "x" + std::to_string(b.height()));
    }
}

// Running-count box OR along one line. `stride` steps between samples.
void or_line(const std::uint8_t* src, std::uint8_t* dst, int n, std::ptrdiff_t stride, int r) {
    int count = 0;
    // window for position 0 covers [-r, r]
    for (int i = 0; i <= std::min(r, n - 1); ++i) count += src[i * stride] ? 1 : 0;
    for (int i = 0; i < n; ++i) {
        dst[i * stride] = count > 0 ? 1 : 0;
        const int leaving = i - r;
        const int entering = i + r + 1;
        if (leaving >= 0 && src[leaving * stride]) --count;
        if (entering < n && src[entering * stride]) ++count;
    }
}

int smoothing_ksize(double sigma) {
    return 2 * static_cast<int>(std::ceil(3.0 * sigma)) + 1;
}

template <typename T>
std::vector<double> blur_plane(std::span<const T> src, int w, int h, std::span<const double> taps,
                               BorderMode border) {
    const int r = static_cast<int>(taps.size()) / 2;
    std::vector<double> tmp(src.size());
    std::vector<double> out(src.size());
    for (int y = 0; y < h; ++y) {
        const T* line = src.data() + static_cast<std::size_t>(y) * w;
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int t = -r; t <= r; ++t) {
                int xx = x + t;
                if (xx < 0 || xx >= w) {
                    if (border == BorderMode::Zero) continue;
                    xx = std::clamp(xx, 0, w - 1);
                }
                acc += taps[t + r] * static_cast<double>(line[xx]);
            }
            tmp[static_cast<std::size_t>(y) * w + x] = acc;
        }
    }
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int t = -r; t <= r; ++t) {
                int yy = y + t;
                if (yy < 0 || yy >= h) {
                    if (border == BorderMode::Zero) continue;
                    yy = std::clamp(yy, 0, h - 1);
                }
                acc += taps[t + r] * tmp[static_cast<std::size_t>(yy) * w + x];
            }
            out[static_cast<std::size_t>(y) * w + x] = acc;
        }
    }
    return out;
}

}  // namespace

BinaryMask dilate(const BinaryMask& mask, Kernel k) {
    const int w = mask.width();
    const int h = mask.height();
    const int r = k.radius();
    if (r == 0) return mask;
    BinaryMask horizontal(w, h);
    for (int y = 0; y < h; ++y) {
        or_line(mask.row(y).data(), horizontal.row(y).data(), w, 1, r);
    }
    BinaryMask out(w, h);
    for (int x = 0; x < w; ++x) {
        or_line(horizontal.data().data() + x, out.data().data() + x, h, w, r);
    }
    return out;
}

BinaryMask mask_subtract(const BinaryMask& a, const BinaryMask& b) {
    require_same_shape(a, b, "mask_subtract");
    BinaryMask out(a.width(), a.height());
    auto o = out.data();
    auto da = a.data();
    auto db = b.data();
    for (std::size_t i = 0; i < o.size(); ++i) o[i] = (da[i] && !db[i]) ? 1 : 0;
    return out;
}

std::vector<double> gaussian_kernel_1d(int ksize, double sigma) {
    if (ksize < 1 || ksize % 2 == 0) {
        throw InvalidKernelError("gaussian kernel size must be odd, got " + std::to_string(ksize));
    }
    if (!(sigma > 0.0)) {
        throw InvalidRangeError("gaussian sigma must be positive");
    }
    const int r = ksize / 2;
    std::vector<double> taps(ksize);
    for (int i = -r; i <= r; ++i) {
        taps[i + r] = std::exp(-static_cast<double>(i * i) / (2.0 * sigma * sigma));
    }
    const double sum = std::accumulate(taps.begin(), taps.end(), 0.0);
    for (double& t : taps) t /= sum;
    return taps;
}

template <typename Map>
Map gaussian_blur(const Map& map, int ksize, double sigma, BorderMode border) {
    const auto taps = gaussian_kernel_1d(ksize, sigma);
    return Map(map.width(), map.height(),
               blur_plane(map.data(), map.width(), map.height(), taps, border));
}

template FloatMap gaussian_blur(const FloatMap&, int, double, BorderMode);
template RealPlane gaussian_blur(const RealPlane&, int, double, BorderMode);

CannyResult canny(const GrayImage& img, const CannyParams& params) {
    if (!(params.sigma > 0.0)) throw InvalidRangeError("canny sigma must be positive");
    if (params.low < 0.0 || params.low > params.high) {
        throw InvalidThresholdError("canny thresholds require 0 <= low <= high");
    }
    const int w = img.width();
    const int h = img.height();
    const auto taps = gaussian_kernel_1d(smoothing_ksize(params.sigma), params.sigma);
    const std::vector<double> s = blur_plane(img.data(), w, h, taps, BorderMode::Replicate);

    auto px = [&](int x, int y) {
        x = std::clamp(x, 0, w - 1);
        y = std::clamp(y, 0, h - 1);
        return s[static_cast<std::size_t>(y) * w + x];
    };

    const std::size_t n = s.size();
    std::vector<double> gx(n), gy(n), mag(n);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const double dx = (px(x + 1, y - 1) + 2.0 * px(x + 1, y) + px(x + 1, y + 1)) -
                              (px(x - 1, y - 1) + 2.0 * px(x - 1, y) + px(x - 1, y + 1));
            const double dy = (px(x - 1, y + 1) + 2.0 * px(x, y + 1) + px(x + 1, y + 1)) -
                              (px(x - 1, y - 1) + 2.0 * px(x, y - 1) + px(x + 1, y - 1));
            const std::size_t i = static_cast<std::size_t>(y) * w + x;
            gx[i] = dx;
            gy[i] = dy;
            mag[i] = std::sqrt(dx * dx + dy * dy);
        }
    }

    auto mag_at = [&](int x, int y) {
        if (x < 0 || y < 0 || x >= w || y >= h) return 0.0;
        return mag[static_cast<std::size_t>(y) * w + x];
    };

    const double tan_lo = std::tan(M_PI / 8.0);
    const double tan_hi = std::tan(3.0 * M_PI / 8.0);

    // 0 = suppressed, 1 = weak, 2 = strong
    std::vector<std::uint8_t> state(n, 0);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const std::size_t i = static_cast<std::size_t>(y) * w + x;
            const double m = mag[i];
            if (!(m > params.low)) continue;
            const double ax = std::abs(gx[i]);
            const double ay = std::abs(gy[i]);
            double before = 0.0;
            double after = 0.0;
            if (ay <= ax * tan_lo) {
                before = mag_at(x - 1, y);
                after = mag_at(x + 1, y);
            } else if (ay > ax * tan_hi) {
                before = mag_at(x, y - 1);
                after = mag_at(x, y + 1);
            } else if (gx[i] * gy[i] > 0.0) {
                before = mag_at(x - 1, y - 1);
                after = mag_at(x + 1, y + 1);
            } else {
                before = mag_at(x + 1, y - 1);
                after = mag_at(x - 1, y + 1);
            }
            if (m >= before && m > after) state[i] = m > params.high ? 2 : 1;
        }
    }

    BinaryMask edges(w, h);
    auto e = edges.data();
    std::vector<std::size_t> stack;
    for (std::size_t i = 0; i < n; ++i) {
        if (state[i] == 2) {
            e[i] = 1;
            stack.push_back(i);
        }
    }
    while (!stack.empty()) {
        const std::size_t i = stack.back();
        stack.pop_back();
        const int x = static_cast<int>(i % w);
        const int y = static_cast<int>(i / w);
        for (int dy = -1; dy <= 1; ++dy) {
            for (int dx = -1; dx <= 1; ++dx) {
                const int xx = x + dx;
                const int yy = y + dy;
                if (xx < 0 || yy < 0 || xx >= w || yy >= h) continue;
                const std::size_t j = static_cast<std::size_t>(yy) * w + xx;
                if (state[j] != 0 && !e[j]) {
                    e[j] = 1;
                    stack.push_back(j);
                }
            }
        }
    }

    const double peak = *std::max_element(mag.begin(), mag.end());
    FloatMap magnitude(w, h);
    if (peak > 0.0) {
        auto m = magnitude.data();
        for (std::size_t i = 0; i < n; ++i) m[i] = mag[i] / peak;
    }
    return {std::move(edges), std::move(magnitude)};
}

NearestMap nearest_set_pixel(const BinaryMask& mask) {
    const int w = mask.width();
    const int h = mask.height();
    const std::size_t n = mask.size();
    NearestMap out{w, h, std::vector<std::int64_t>(n, -1), std::vector<std::int64_t>(n, -1)};

    // Column pass: nearest set row in the same column, upper row on ties.
    constexpr std::int64_t kNone = -1;
    std::vector<std::int64_t> col_row(n, kNone);
    for (int x = 0; x < w; ++x) {
        std::int64_t above = kNone;
        for (int y = 0; y < h; ++y) {
            if (mask.at(x, y)) above = y;
            col_row[static_cast<std::size_t>(y) * w + x] = above;
        }
        std::int64_t below = kNone;
        for (int y = h - 1; y >= 0; --y) {
            if (mask.at(x, y)) below = y;
            auto& best = col_row[static_cast<std::size_t>(y) * w + x];
            if (below != kNone && (best == kNone || below - y < y - best)) best = below;
        }
    }

    // Row pass: lower envelope of parabolas (x - q)^2 + f(q), with the
    // breakpoints kept as exact rationals num/den.
    std::vector<int> sites(w);
    std::vector<std::int64_t> f(w);
    std::vector<std::int64_t> z_num(w + 1), z_den(w + 1);
    for (int y = 0; y < h; ++y) {
        int count = 0;
        for (int q = 0; q < w; ++q) {
            const std::int64_t r = col_row[static_cast<std::size_t>(y) * w + q];
            if (r == kNone) continue;
            const std::int64_t d = r - y;
            f[q] = d * d;
            const std::int64_t fq = f[q] + static_cast<std::int64_t>(q) * q;
            std::int64_t num = 0;
            std::int64_t den = 1;
            while (count > 0) {
                const int p = sites[count - 1];
                num = fq - (f[p] + static_cast<std::int64_t>(p) * p);
                den = 2 * static_cast<std::int64_t>(q - p);
                // pop while the new breakpoint does not exceed the previous one
                if (count > 1 && num * z_den[count - 1] <= z_num[count - 1] * den) {
                    --count;
                } else {
                    break;
                }
            }
            sites[count] = q;
            z_num[count] = num;
            z_den[count] = den;
            ++count;
        }
        if (count == 0) continue;
        int k = 0;
        for (int x = 0; x < w; ++x) {
            while (k + 1 < count && z_num[k + 1] < static_cast<std::int64_t>(x) * z_den[k + 1]) ++k;
            const int q = sites[k];
            const std::size_t i = static_cast<std::size_t>(y) * w + x;
            const std::int64_t dx = x - q;
            out.squared[i] = dx * dx + f[q];
            out.nearest[i] = col_row[static_cast<std::size_t>(y) * w + q] * w + q;
        }
    }
    return out;
}

RealPlane distance_transform(const BinaryMask& mask) {
    const NearestMap nm = nearest_set_pixel(mask);
    RealPlane out(mask.width(), mask.height());
    auto o = out.data();
    for (std::size_t i = 0; i < o.size(); ++i) {
        o[i] = nm.squared[i] < 0 ? std::numeric_limits<double>::infinity()
                                 : std::sqrt(static_cast<double>(nm.squared[i]));
    }
    return out;
}

std::array<std::uint64_t, 256> histogram(const GrayImage& img) {
    std::array<std::uint64_t, 256> counts{};
    for (std::uint8_t v : img.data()) ++counts[v];
    return counts;
}

GrayImage resize_bilinear(const GrayImage& img, int width, int height) {
    if (width < 1 || height < 1) {
        throw ShapeError("resize target must be at least 1x1");
    }
    const int sw = img.width();
    const int sh = img.height();
    const double scale_x = static_cast<double>(sw) / width;
    const double scale_y = static_cast<double>(sh) / height;

    struct Tap {
        int i0, i1;
        double frac;
    };
    auto taps_for = [](int n_dst, int n_src, double scale) {
        std::vector<Tap> taps(n_dst);
        for (int d = 0; d < n_dst; ++d) {
            const double s = std::clamp((d + 0.5) * scale - 0.5, 0.0, static_cast<double>(n_src - 1));
            const int i0 = static_cast<int>(std::floor(s));
            taps[d] = {i0, std::min(i0 + 1, n_src - 1), s - i0};
        }
        return taps;
    };
    const auto tx = taps_for(width, sw, scale_x);
    const auto ty = taps_for(height, sh, scale_y);

    GrayImage out(width, height);
    for (int y = 0; y < height; ++y) {
        const auto [y0, y1, fy] = ty[y];
        for (int x = 0; x < width; ++x) {
            const auto [x0, x1, fx] = tx[x];
            const double top = (1.0 - fx) * img.at(x0, y0) + fx * img.at(x1, y0);
            const double bottom = (1.0 - fx) * img.at(x0, y1) + fx * img.at(x1, y1);
            const double v = (1.0 - fy) * top + fy * bottom;
            out.at(x, y) = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
        }
    }
    return out;
}

double percentile_sorted(std::span<const double> sorted, double pct) {
    if (sorted.empty()) throw EmptyInputError("percentile of empty data");
    const double pos = pct / 100.0 * static_cast<double>(sorted.size() - 1);
    const auto i = static_cast<std::size_t>(std::floor(pos));
    if (i + 1 >= sorted.size()) return sorted.back();
    const double frac = pos - static_cast<double>(i);
    return sorted[i] + frac * (sorted[i + 1] - sorted[i]);
}

FloatMap truncate_normalize(const GrayImage& img, double lo_pct, double hi_pct) {
    if (!(lo_pct >= 0.0 && lo_pct < hi_pct && hi_pct <= 100.0)) {
        throw InvalidRangeError("percentiles require 0 <= lo < hi <= 100");
    }
    std::vector<double> sorted(img.data().begin(), img.data().end());
    std::sort(sorted.begin(), sorted.end());
    const double lo = percentile_sorted(sorted, lo_pct);
    const double hi = percentile_sorted(sorted, hi_pct);

    std::vector<double> clipped(img.size());
    std::transform(img.data().begin(), img.data().end(), clipped.begin(),
                   [&](std::uint8_t v) { return std::clamp(static_cast<double>(v), lo, hi); });
    const auto [mn, mx] = std::minmax_element(clipped.begin(), clipped.end());
    const double cmin = *mn;
    const double range = *mx - cmin;
    for (double& v : clipped) v = range > 0.0 ? (v - cmin) / range : 0.0;
    return FloatMap(img.width(), img.height(), std::move(clipped));
}

BinaryMask threshold_mask(const GrayImage& img, int threshold) {
    BinaryMask out(img.width(), img.height());
    auto o = out.data();
    auto d = img.data();
    for (std::size_t i = 0; i < o.size(); ++i) o[i] = d[i] > threshold ? 1 : 0;
    return out;
}

FloatMap to_float_map(const GrayImage& img) {
    FloatMap out(img.width(), img.height());
    auto o = out.data();
    auto d = img.data();
    for (std::size_t i = 0; i < o.size(); ++i) o[i] = d[i] / 255.0;
    return out;
}

GrayImage to_gray(const FloatMap& map) {
    GrayImage out(map.width(), map.height());
    auto o = out.data();
    auto d = map.data();
    for (std::size_t i = 0; i < o.size(); ++i) {
        o[i] = static_cast<std::uint8_t>(std::clamp(std::lround(d[i] * 255.0), 0L, 255L));
    }
    return out;
}

}  // namespace campro
