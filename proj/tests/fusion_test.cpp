#include <gtest/gtest.h>

#include <cmath>

#include "campro/error.hpp"
#include "campro/fusion.hpp"
#include "campro/wavelet.hpp"
#include "test_util.hpp"

namespace campro {
namespace {

// Direct 3x3 zero-padded convolution, one output pixel at a time.
Tensor3 naive_conv3x3(const Tensor3& t, const Conv3x3& conv) {
    Tensor3 out(conv.out_channels, t.height(), t.width());
    for (int o = 0; o < conv.out_channels; ++o)
        for (int y = 0; y < t.height(); ++y)
            for (int x = 0; x < t.width(); ++x) {
                double acc = conv.bias[o];
                for (int i = 0; i < conv.in_channels; ++i)
                    for (int ky = 0; ky < 3; ++ky)
                        for (int kx = 0; kx < 3; ++kx) {
                            const int yy = y + ky - 1, xx = x + kx - 1;
                            if (yy < 0 || xx < 0 || yy >= t.height() || xx >= t.width()) continue;
                            acc += conv.weights[((o * conv.in_channels + i) * 3 + ky) * 3 + kx] * t.at(i, yy, xx);
                        }
                out.at(o, y, x) = acc;
            }
    return out;
}

TEST(Fusion, PointwiseConvIsChannelMix) {
    const Tensor3 t(2, 1, 2, std::vector<double>{1, 2, 3, 4});
    const PointwiseConv pc{2, 1, {10.0, 100.0}, {0.5}};
    const Tensor3 out = pointwise_conv(t, pc);
    EXPECT_EQ(out.at(0, 0, 0), 0.5 + 10 * 1 + 100 * 3);
    EXPECT_EQ(out.at(0, 0, 1), 0.5 + 10 * 2 + 100 * 4);
    EXPECT_THROW(pointwise_conv(Tensor3(3, 1, 2), pc), ShapeError);
}

TEST(Fusion, Conv3x3MatchesDirectLoops) {
    const FusionWeights w = seeded_weights(FusionPlan::desk(4, 7), 9);
    const Tensor3 t = seeded_tensor(4, 7, 5, 10);
    const Tensor3 fast = conv3x3_same(t, w.cbr.conv);
    const Tensor3 slow = naive_conv3x3(t, w.cbr.conv);
    for (std::size_t i = 0; i < fast.size(); ++i) EXPECT_NEAR(fast.data()[i], slow.data()[i], 1e-12);
}

TEST(Fusion, BatchNormAndRelu) {
    const Tensor3 t(1, 1, 2, std::vector<double>{3.0, -1.0});
    const BatchNorm bn{{2.0}, {1.0}, {1.0}, {3.0}, 1.0};
    const Tensor3 out = batch_norm(t, bn);
    EXPECT_DOUBLE_EQ(out.at(0, 0, 0), (3.0 - 1.0) * 2.0 / 2.0 + 1.0);
    EXPECT_DOUBLE_EQ(out.at(0, 0, 1), (-1.0 - 1.0) * 2.0 / 2.0 + 1.0);
    const Tensor3 r = relu(out);
    EXPECT_EQ(r.at(0, 0, 1), 0.0);
    EXPECT_EQ(r.at(0, 0, 0), out.at(0, 0, 0));
}

TEST(Fusion, ShapeChainAndResidual) {
    for (int c : {1, 3, 8}) {
        const FusionPlan plan = FusionPlan::desk(c, 6);
        const FusionWeights w = seeded_weights(plan, c);
        const Tensor3 a = seeded_tensor(c, 6, 6, 1), b = seeded_tensor(c, 6, 6, 2);
        const Tensor3 em = pointwise_conv(concat_channels(a, b), w.dc1);
        const Tensor3 obb = bbmg_forward(a, b, w.dc1, w.cbr);
        ASSERT_EQ(obb.channels(), 2 * c);
        EXPECT_EQ(obb.slice_channels(c, 2 * c), em);
        EXPECT_EQ(obb.slice_channels(0, c), cbr(em, w.cbr));
        const Tensor3 ode = ode_forward(diagonal_hf(seeded_tensor(c, 6, 6, 3)), obb, w.dc2);
        EXPECT_EQ(ode.channels(), c);
        EXPECT_TRUE(ode.all_finite());
    }
}

TEST(Fusion, StageNamedErrors) {
    const FusionWeights w = seeded_weights(FusionPlan::desk(4, 4), 1);
    const Tensor3 a = seeded_tensor(4, 4, 4, 1);
    try {
        bbmg_forward(a, seeded_tensor(3, 4, 4, 2), w.dc1, w.cbr);
        FAIL();
    } catch (const ShapeError& e) {
        EXPECT_NE(std::string(e.what()).find("bbmg.concat"), std::string::npos);
    }
    const FusionWeights w8 = seeded_weights(FusionPlan::desk(8, 4), 1);
    try {
        bbmg_forward(a, a, w8.dc1, w.cbr);
        FAIL();
    } catch (const ShapeError& e) {
        EXPECT_NE(std::string(e.what()).find("bbmg.dc1"), std::string::npos);
    }
    try {
        ode_forward(seeded_tensor(4, 4, 4, 1), seeded_tensor(4, 4, 4, 1), w.dc2);
        FAIL();
    } catch (const ShapeError& e) {
        EXPECT_NE(std::string(e.what()).find("ode.dc2"), std::string::npos);
    }
    EXPECT_THROW(ode_forward(seeded_tensor(4, 2, 2, 1), seeded_tensor(8, 4, 4, 1), w.dc2), ShapeError);
}

TEST(Fusion, SeededWeightsDeterministic) {
    const FusionPlan plan = FusionPlan::desk();
    const FusionWeights a = seeded_weights(plan, 42);
    const FusionWeights b = seeded_weights(plan, 42);
    const FusionWeights c = seeded_weights(plan, 43);
    EXPECT_EQ(a.dc1.weights, b.dc1.weights);
    EXPECT_EQ(a.dc2.weights, b.dc2.weights);
    EXPECT_NE(a.dc1.weights, c.dc1.weights);
    EXPECT_EQ(seeded_tensor(2, 3, 4, 5), seeded_tensor(2, 3, 4, 5));
}

TEST(Fusion, WeightBundleRoundTrip) {
    const auto dir = testing::scratch_dir("fusion_bundle");
    const FusionWeights w = seeded_weights(FusionPlan::desk(5, 4), 77);
    save_weights(w, dir / "w.npz");
    const FusionWeights back = load_weights(dir / "w.npz");
    EXPECT_EQ(back.dc1.weights, w.dc1.weights);
    EXPECT_EQ(back.dc1.bias, w.dc1.bias);
    EXPECT_EQ(back.cbr.conv.weights, w.cbr.conv.weights);
    EXPECT_EQ(back.cbr.bn.gamma, w.cbr.bn.gamma);
    EXPECT_EQ(back.cbr.bn.running_var, w.cbr.bn.running_var);
    EXPECT_EQ(back.cbr.bn.epsilon, w.cbr.bn.epsilon);
    EXPECT_EQ(back.dc2.weights, w.dc2.weights);
    EXPECT_EQ(back.dc2.in_channels, 15);
}

TEST(Tensor3, Basics) {
    EXPECT_NO_THROW(Tensor3(0, 2, 2));
    EXPECT_THROW(Tensor3(1, 0, 2), ShapeError);
    Tensor3 t(1, 1, 1);
    t.at(0, 0, 0) = std::nan("");
    EXPECT_FALSE(t.all_finite());
    EXPECT_EQ(Tensor3(2, 3, 4).shape_string(), "(2,3,4)");
}

}  // namespace
}  // namespace campro
