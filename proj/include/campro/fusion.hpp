#pragma once

// Dense prompt-embedding fusion at desk scale:
//   EM  = DC1(cat(E_box, E_boundary))
//   OBB = cat(CBR(EM), EM)
//   ODE = DC2(cat(HF, OBB))
// CBR is 3x3 same-padding convolution, inference-mode batch normalisation
// and a rectifier.

#include <cstdint>
#include <filesystem>
#include <vector>

#include "campro/tensor.hpp"

namespace campro {

/// 1x1 convolution; weights are out x in, row-major.
struct PointwiseConv {
    int in_channels = 0;
    int out_channels = 0;
    std::vector<double> weights;
    std::vector<double> bias;

    void validate() const;
};

/// 3x3 convolution; weights are out x in x 3 x 3.
struct Conv3x3 {
    int in_channels = 0;
    int out_channels = 0;
    std::vector<double> weights;
    std::vector<double> bias;

    void validate() const;
};

struct BatchNorm {
    std::vector<double> gamma;
    std::vector<double> beta;
    std::vector<double> running_mean;
    std::vector<double> running_var;
    double epsilon = 1e-5;

    void validate(int channels) const;
};

struct CbrBlock {
    Conv3x3 conv;
    BatchNorm bn;
};

Tensor3 concat_channels(const Tensor3& a, const Tensor3& b);
Tensor3 pointwise_conv(const Tensor3& t, const PointwiseConv& pc);
Tensor3 conv3x3_same(const Tensor3& t, const Conv3x3& conv);
Tensor3 batch_norm(const Tensor3& t, const BatchNorm& bn);
Tensor3 relu(const Tensor3& t);
Tensor3 cbr(const Tensor3& t, const CbrBlock& blk);

Tensor3 bbmg_forward(const Tensor3& e_box, const Tensor3& e_boundary, const PointwiseConv& dc1,
                     const CbrBlock& blk);
Tensor3 ode_forward(const Tensor3& hf, const Tensor3& obb, const PointwiseConv& dc2);

/// Channel plan of one fusion configuration.
struct FusionPlan {
    int embed_channels = 256;  ///< C of each dense prompt embedding
    int hf_channels = 256;     ///< channels of the image-embedding HF branch
    int out_channels = 256;    ///< ODE channels expected downstream
    int height = 64;
    int width = 64;

    static FusionPlan reference() { return {}; }
    static FusionPlan desk(int c = 8, int size = 16) { return {c, c, c, size, size}; }
};

struct FusionWeights {
    PointwiseConv dc1;
    CbrBlock cbr;
    PointwiseConv dc2;
};

/// Deterministic uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights; batch
/// norm statistics drawn near identity.
FusionWeights seeded_weights(const FusionPlan& plan, std::uint64_t seed);

/// Uniform [-1,1) tensor from a seed.
Tensor3 seeded_tensor(int channels, int height, int width, std::uint64_t seed);

/// Bundle layout: dc1.weight, dc1.bias, cbr.conv.weight, cbr.conv.bias,
/// cbr.bn.weight, cbr.bn.bias, cbr.bn.running_mean, cbr.bn.running_var,
/// cbr.bn.eps, dc2.weight, dc2.bias stored as f32 arrays in one npz.
void save_weights(const FusionWeights& w, const std::filesystem::path& npz);
FusionWeights load_weights(const std::filesystem::path& npz);

}  // namespace campro
