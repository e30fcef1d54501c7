#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "campro/error.hpp"
#include "campro/raster.hpp"
#include "test_util.hpp"

namespace campro {
namespace {

using testing::random_gray;
using testing::random_mask;

BinaryMask naive_dilate(const BinaryMask& m, int k) {
    const int r = k / 2;
    BinaryMask out(m.width(), m.height());
    for (int y = 0; y < m.height(); ++y) {
        for (int x = 0; x < m.width(); ++x) {
            std::uint8_t v = 0;
            for (int dy = -r; dy <= r; ++dy) {
                for (int dx = -r; dx <= r; ++dx) {
                    const int xx = x + dx;
                    const int yy = y + dy;
                    if (xx >= 0 && yy >= 0 && xx < m.width() && yy < m.height()) v = std::max(v, m.at(xx, yy));
                }
            }
            out.at(x, y) = v;
        }
    }
    return out;
}

// Straightforward Canny: 2-D loops, atan2 sectors.
BinaryMask reference_canny(const GrayImage& img, double sigma, double low, double high) {
    const int w = img.width();
    const int h = img.height();
    const int r = static_cast<int>(std::ceil(3.0 * sigma));
    std::vector<double> g(2 * r + 1);
    double sum = 0.0;
    for (int i = -r; i <= r; ++i) sum += g[i + r] = std::exp(-(i * i) / (2.0 * sigma * sigma));
    for (double& v : g) v /= sum;
    auto clampx = [&](int x) { return std::clamp(x, 0, w - 1); };
    auto clampy = [&](int y) { return std::clamp(y, 0, h - 1); };

    std::vector<double> tmp(w * h), s(w * h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double a = 0.0;
            for (int t = -r; t <= r; ++t) a += g[t + r] * img.at(clampx(x + t), y);
            tmp[y * w + x] = a;
        }
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double a = 0.0;
            for (int t = -r; t <= r; ++t) a += g[t + r] * tmp[clampy(y + t) * w + x];
            s[y * w + x] = a;
        }
    auto S = [&](int x, int y) { return s[clampy(y) * w + clampx(x)]; };
    std::vector<double> gx(w * h), gy(w * h), mag(w * h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const double dx = (S(x + 1, y - 1) + 2.0 * S(x + 1, y) + S(x + 1, y + 1)) -
                              (S(x - 1, y - 1) + 2.0 * S(x - 1, y) + S(x - 1, y + 1));
            const double dy = (S(x - 1, y + 1) + 2.0 * S(x, y + 1) + S(x + 1, y + 1)) -
                              (S(x - 1, y - 1) + 2.0 * S(x, y - 1) + S(x + 1, y - 1));
            gx[y * w + x] = dx;
            gy[y * w + x] = dy;
            mag[y * w + x] = std::sqrt(dx * dx + dy * dy);
        }
    auto M = [&](int x, int y) { return (x < 0 || y < 0 || x >= w || y >= h) ? 0.0 : mag[y * w + x]; };

    std::vector<int> state(w * h, 0);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const double m = mag[y * w + x];
            if (!(m > low)) continue;
            double angle = std::atan2(gy[y * w + x], gx[y * w + x]) * 180.0 / M_PI;
            if (angle < 0) angle += 180.0;
            int ox = 0, oy = 0;
            if (angle <= 22.5 || angle >= 157.5) {
                ox = 1;
            } else if (angle <= 67.5) {
                ox = 1;
                oy = 1;
            } else if (angle < 112.5) {
                oy = 1;
            } else {
                ox = -1;
                oy = 1;
            }
            if (m >= M(x - ox, y - oy) && m > M(x + ox, y + oy)) state[y * w + x] = m > high ? 2 : 1;
        }
    // hysteresis by repeated sweeps
    BinaryMask out(w, h);
    for (int i = 0; i < w * h; ++i) out.data()[i] = state[i] == 2;
    bool changed = true;
    while (changed) {
        changed = false;
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                if (state[y * w + x] != 1 || out.at(x, y)) continue;
                for (int dy = -1; dy <= 1 && !out.at(x, y); ++dy)
                    for (int dx = -1; dx <= 1; ++dx) {
                        const int xx = x + dx, yy = y + dy;
                        if (xx < 0 || yy < 0 || xx >= w || yy >= h) continue;
                        if (out.at(xx, yy)) {
                            out.at(x, y) = 1;
                            changed = true;
                            break;
                        }
                    }
            }
    }
    return out;
}

TEST(Kernel, RejectsEvenAndNonPositive) {
    EXPECT_THROW(Kernel(0), InvalidKernelError);
    EXPECT_THROW(Kernel(4), InvalidKernelError);
    EXPECT_THROW(Kernel(-3), InvalidKernelError);
    EXPECT_EQ(Kernel(7).radius(), 3);
}

TEST(Dilate, MatchesNaiveMaxFilter) {
    std::mt19937 rng(7);
    for (int trial = 0; trial < 60; ++trial) {
        const BinaryMask m = random_mask(rng, 5 + trial % 29, 3 + trial % 31, 0.05 + 0.01 * (trial % 20));
        for (int k : {1, 3, 5, 7, 9}) EXPECT_EQ(dilate(m, Kernel(k)), naive_dilate(m, k)) << k;
    }
}

TEST(Dilate, SinglePixelGrowsToSquare) {
    BinaryMask m(9, 9);
    m.at(4, 4) = 1;
    const BinaryMask d = dilate(m, Kernel(5));
    for (int y = 0; y < 9; ++y)
        for (int x = 0; x < 9; ++x) EXPECT_EQ(d.at(x, y), (std::abs(x - 4) <= 2 && std::abs(y - 4) <= 2) ? 1 : 0);
}

TEST(Dilate, EmptyStaysEmptyAndMonotone) {
    std::mt19937 rng(3);
    const BinaryMask empty(12, 8);
    EXPECT_EQ(dilate(empty, Kernel(7)), empty);
    const BinaryMask m = random_mask(rng, 20, 20, 0.1);
    const BinaryMask d3 = dilate(m, Kernel(3));
    const BinaryMask d5 = dilate(m, Kernel(5));
    for (std::size_t i = 0; i < m.size(); ++i) {
        EXPECT_GE(d3.data()[i], m.data()[i]);
        EXPECT_GE(d5.data()[i], d3.data()[i]);
    }
}

TEST(MaskSubtract, SetDifference) {
    BinaryMask a(3, 1, std::vector<std::uint8_t>{1, 1, 0});
    BinaryMask b(3, 1, std::vector<std::uint8_t>{0, 1, 1});
    EXPECT_EQ(mask_subtract(a, b), BinaryMask(3, 1, std::vector<std::uint8_t>{1, 0, 0}));
    EXPECT_THROW(mask_subtract(a, BinaryMask(2, 1)), ShapeError);
}

TEST(Canny, MatchesReferenceImplementation) {
    std::mt19937 rng(11);
    for (int trial = 0; trial < 25; ++trial) {
        const BinaryMask shape = testing::blob_mask(rng, 32, 24);
        const GrayImage img = trial % 2 ? testing::textured_image(rng, shape) : random_gray(rng, 32, 24);
        const CannyResult c = canny(img);
        EXPECT_EQ(c.edges, reference_canny(img, 1.4, 50.0, 150.0)) << trial;
    }
}

TEST(Canny, VerticalStepGivesOneColumn) {
    GrayImage img(16, 16);
    for (int y = 0; y < 16; ++y)
        for (int x = 8; x < 16; ++x) img.at(x, y) = 255;
    const CannyResult c = canny(img);
    int column = -1;
    for (int y = 0; y < 16; ++y) {
        int count = 0;
        for (int x = 0; x < 16; ++x) {
            if (!c.edges.at(x, y)) continue;
            ++count;
            if (column < 0) column = x;
            EXPECT_EQ(x, column);
        }
        EXPECT_EQ(count, 1) << "row " << y;
    }
    EXPECT_TRUE(column == 7 || column == 8) << column;
}

TEST(Canny, ConstantImageHasNoEdges) {
    const GrayImage img(20, 10, 93);
    const CannyResult c = canny(img);
    EXPECT_EQ(std::count(c.edges.data().begin(), c.edges.data().end(), 1), 0);
    for (double v : c.magnitude.data()) EXPECT_EQ(v, 0.0);
}

TEST(Canny, MagnitudeNormalisedToUnitPeak) {
    std::mt19937 rng(5);
    const CannyResult c = canny(random_gray(rng, 17, 13));
    const auto [lo, hi] = std::minmax_element(c.magnitude.data().begin(), c.magnitude.data().end());
    EXPECT_GE(*lo, 0.0);
    EXPECT_DOUBLE_EQ(*hi, 1.0);
}

TEST(Canny, RejectsBadParameters) {
    const GrayImage img(4, 4);
    EXPECT_THROW(canny(img, {1.4, 200.0, 100.0}), InvalidThresholdError);
    EXPECT_THROW(canny(img, {0.0, 50.0, 150.0}), InvalidRangeError);
}

TEST(GaussianBlur, KernelSumsToOneAndPreservesConstants) {
    const auto taps = gaussian_kernel_1d(7, 5.0);
    double sum = 0.0;
    for (double t : taps) sum += t;
    EXPECT_NEAR(sum, 1.0, 1e-15);
    EXPECT_DOUBLE_EQ(taps[0], taps[6]);
    const RealPlane c(9, 5, 0.25);
    const auto blurred = gaussian_blur(c, 7, 5.0);
    for (double v : blurred.data()) EXPECT_NEAR(v, 0.25, 1e-15);
    EXPECT_THROW(gaussian_kernel_1d(4, 1.0), InvalidKernelError);
}

TEST(GaussianBlur, ZeroBorderLosesMassAtEdges) {
    const RealPlane c(5, 5, 1.0);
    const RealPlane z = gaussian_blur(c, 3, 1.0, BorderMode::Zero);
    EXPECT_LT(z.at(0, 0), 1.0);
    EXPECT_NEAR(z.at(2, 2), 1.0, 1e-15);
}

std::int64_t brute_nearest(const BinaryMask& m, int x, int y, std::int64_t& index) {
    std::int64_t best = -1;
    index = -1;
    for (int qx = 0; qx < m.width(); ++qx)
        for (int qy = 0; qy < m.height(); ++qy) {
            if (!m.at(qx, qy)) continue;
            const std::int64_t d = std::int64_t(qx - x) * (qx - x) + std::int64_t(qy - y) * (qy - y);
            if (best < 0 || d < best) {
                best = d;
                index = std::int64_t(qy) * m.width() + qx;
            }
        }
    return best;
}

TEST(NearestSetPixel, MatchesBruteForceIncludingTies) {
    std::mt19937 rng(19);
    for (int trial = 0; trial < 80; ++trial) {
        const BinaryMask m = random_mask(rng, 1 + trial % 23, 1 + (trial * 7) % 19, 0.02 + 0.01 * (trial % 15));
        const NearestMap nm = nearest_set_pixel(m);
        for (int y = 0; y < m.height(); ++y)
            for (int x = 0; x < m.width(); ++x) {
                std::int64_t idx = 0;
                const std::int64_t d = brute_nearest(m, x, y, idx);
                const std::size_t i = std::size_t(y) * m.width() + x;
                ASSERT_EQ(nm.squared[i], d) << trial << " " << x << "," << y;
                ASSERT_EQ(nm.nearest[i], idx) << trial << " " << x << "," << y;
            }
    }
}

TEST(DistanceTransform, ZeroOnSetAndInfinityWhenEmpty) {
    BinaryMask m(5, 4);
    m.at(1, 1) = 1;
    const RealPlane d = distance_transform(m);
    EXPECT_EQ(d.at(1, 1), 0.0);
    EXPECT_DOUBLE_EQ(d.at(4, 3), std::sqrt(9.0 + 4.0));
    const auto dist = distance_transform(BinaryMask(3, 3));
    for (double v : dist.data()) EXPECT_TRUE(std::isinf(v));
}

TEST(Histogram, CountsEveryPixel) {
    std::mt19937 rng(2);
    const GrayImage img = random_gray(rng, 13, 11);
    const auto h = histogram(img);
    std::uint64_t total = 0;
    for (auto c : h) total += c;
    EXPECT_EQ(total, img.size());
    EXPECT_EQ(h[img.at(3, 3)] > 0, true);
}

TEST(ResizeBilinear, IdentityAndConstant) {
    std::mt19937 rng(4);
    const GrayImage img = random_gray(rng, 10, 7);
    EXPECT_EQ(resize_bilinear(img, 10, 7), img);
    const GrayImage c(6, 6, 77);
    const auto resized = resize_bilinear(c, 13, 4);
    for (auto v : resized.data()) EXPECT_EQ(v, 77);
    EXPECT_THROW(resize_bilinear(img, 0, 3), ShapeError);
}

TEST(ResizeBilinear, UpsampleTwoPixels) {
    const GrayImage img(2, 1, std::vector<std::uint8_t>{0, 100});
    const GrayImage up = resize_bilinear(img, 4, 1);
    // centres at -0.25, 0.25, 0.75, 1.25 clamped to [0,1]
    EXPECT_EQ(up.at(0, 0), 0);
    EXPECT_EQ(up.at(1, 0), 25);
    EXPECT_EQ(up.at(2, 0), 75);
    EXPECT_EQ(up.at(3, 0), 100);
}

TEST(TruncateNormalize, RangeAndConstantInput) {
    std::mt19937 rng(8);
    const FloatMap f = truncate_normalize(random_gray(rng, 30, 30));
    const auto [lo, hi] = std::minmax_element(f.data().begin(), f.data().end());
    EXPECT_EQ(*lo, 0.0);
    EXPECT_EQ(*hi, 1.0);
    const auto norm = truncate_normalize(GrayImage(4, 4, 9));
    for (double v : norm.data()) EXPECT_EQ(v, 0.0);
    EXPECT_THROW(truncate_normalize(GrayImage(2, 2), 50.0, 10.0), InvalidRangeError);
}

TEST(PercentileSorted, LinearInterpolation) {
    const std::vector<double> v{0.0, 10.0, 20.0, 30.0};
    EXPECT_DOUBLE_EQ(percentile_sorted(v, 50.0), 15.0);
    EXPECT_DOUBLE_EQ(percentile_sorted(v, 0.0), 0.0);
    EXPECT_DOUBLE_EQ(percentile_sorted(v, 100.0), 30.0);
    EXPECT_THROW(percentile_sorted(std::span<const double>{}, 5.0), EmptyInputError);
}

TEST(Conversions, ThresholdIsStrict) {
    const GrayImage img(3, 1, std::vector<std::uint8_t>{128, 129, 0});
    EXPECT_EQ(threshold_mask(img, 128), BinaryMask(3, 1, std::vector<std::uint8_t>{0, 1, 0}));
    const GrayImage back = to_gray(to_float_map(img));
    EXPECT_EQ(back, img);
}

}  // namespace
}  // namespace campro
