#include "campro/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

#include "campro/npy.hpp"

namespace campro {

namespace {

void check_len(const std::vector<double>& v, std::size_t n, const std::string& what) {
    if (v.size() != n) {
        throw ShapeError(what + " holds " + std::to_string(v.size()) + " values, expected " +
                         std::to_string(n));
    }
}

class Uniform {
public:
    explicit Uniform(std::uint64_t seed) : gen_(seed) {}
    // Draws are rounded to float so weight bundles survive an f32 round trip.
    double operator()(double lo, double hi) {
        const double u = static_cast<double>(gen_() >> 11) * 0x1.0p-53;
        return static_cast<float>(lo + (hi - lo) * u);
    }

private:
    std::mt19937_64 gen_;
};

PointwiseConv seeded_pointwise(int in, int out, Uniform& rng) {
    PointwiseConv pc{in, out, std::vector<double>(static_cast<std::size_t>(in) * out),
                     std::vector<double>(out)};
    const double bound = 1.0 / std::sqrt(static_cast<double>(in));
    for (double& w : pc.weights) w = rng(-bound, bound);
    for (double& b : pc.bias) b = rng(-bound, bound);
    return pc;
}

}  // namespace

void PointwiseConv::validate() const {
    if (in_channels < 1 || out_channels < 1) throw ShapeError("pointwise conv needs positive channels");
    check_len(weights, static_cast<std::size_t>(in_channels) * out_channels, "pointwise weights");
    check_len(bias, out_channels, "pointwise bias");
}

void Conv3x3::validate() const {
    if (in_channels < 1 || out_channels < 1) throw ShapeError("3x3 conv needs positive channels");
    check_len(weights, static_cast<std::size_t>(in_channels) * out_channels * 9, "3x3 conv weights");
    check_len(bias, out_channels, "3x3 conv bias");
}

void BatchNorm::validate(int channels) const {
    check_len(gamma, channels, "bn gamma");
    check_len(beta, channels, "bn beta");
    check_len(running_mean, channels, "bn running mean");
    check_len(running_var, channels, "bn running var");
    for (double v : running_var) {
        if (!(v + epsilon > 0.0)) throw InvalidRangeError("bn variance + epsilon must be positive");
    }
}

Tensor3 concat_channels(const Tensor3& a, const Tensor3& b) {
    if (a.height() != b.height() || a.width() != b.width()) {
        throw ShapeError("concat_channels: spatial mismatch " + a.shape_string() + " vs " +
                         b.shape_string());
    }
    std::vector<double> out;
    out.reserve(a.size() + b.size());
    out.insert(out.end(), a.data().begin(), a.data().end());
    out.insert(out.end(), b.data().begin(), b.data().end());
    return Tensor3(a.channels() + b.channels(), a.height(), a.width(), std::move(out));
}

Tensor3 pointwise_conv(const Tensor3& t, const PointwiseConv& pc) {
    pc.validate();
    if (t.channels() != pc.in_channels) {
        throw ShapeError("pointwise_conv: input has " + std::to_string(t.channels()) +
                         " channels, conv expects " + std::to_string(pc.in_channels));
    }
    Tensor3 out(pc.out_channels, t.height(), t.width());
    for (int o = 0; o < pc.out_channels; ++o) {
        auto dst = out.channel(o);
        std::fill(dst.begin(), dst.end(), pc.bias[o]);
        for (int i = 0; i < pc.in_channels; ++i) {
            const double w = pc.weights[static_cast<std::size_t>(o) * pc.in_channels + i];
            const auto src = t.channel(i);
            for (std::size_t p = 0; p < dst.size(); ++p) dst[p] += w * src[p];
        }
    }
    return out;
}

Tensor3 conv3x3_same(const Tensor3& t, const Conv3x3& conv) {
    conv.validate();
    if (t.channels() != conv.in_channels) {
        throw ShapeError("conv3x3: input has " + std::to_string(t.channels()) +
                         " channels, conv expects " + std::to_string(conv.in_channels));
    }
    const int h = t.height();
    const int w = t.width();
    Tensor3 out(conv.out_channels, h, w);
    for (int o = 0; o < conv.out_channels; ++o) {
        auto dst = out.channel(o);
        std::fill(dst.begin(), dst.end(), conv.bias[o]);
        for (int i = 0; i < conv.in_channels; ++i) {
            const auto src = t.channel(i);
            const double* k = conv.weights.data() + (static_cast<std::size_t>(o) * conv.in_channels + i) * 9;
            for (int ky = 0; ky < 3; ++ky) {
                const int dy = ky - 1;
                for (int kx = 0; kx < 3; ++kx) {
                    const int dx = kx - 1;
                    const double wk = k[ky * 3 + kx];
                    const int x_begin = std::max(0, -dx);
                    const int x_end = std::min(w, w - dx);
                    for (int y = std::max(0, -dy); y < std::min(h, h - dy); ++y) {
                        double* drow = dst.data() + static_cast<std::size_t>(y) * w;
                        const double* srow = src.data() + static_cast<std::size_t>(y + dy) * w + dx;
                        for (int x = x_begin; x < x_end; ++x) drow[x] += wk * srow[x];
                    }
                }
            }
        }
    }
    return out;
}

Tensor3 batch_norm(const Tensor3& t, const BatchNorm& bn) {
    bn.validate(t.channels());
    Tensor3 out = t;
    for (int c = 0; c < t.channels(); ++c) {
        const double scale = bn.gamma[c] / std::sqrt(bn.running_var[c] + bn.epsilon);
        const double mean = bn.running_mean[c];
        const double shift = bn.beta[c];
        for (double& v : out.channel(c)) v = (v - mean) * scale + shift;
    }
    return out;
}

Tensor3 relu(const Tensor3& t) {
    Tensor3 out = t;
    for (double& v : out.data()) v = std::max(0.0, v);
    return out;
}

Tensor3 cbr(const Tensor3& t, const CbrBlock& blk) {
    return relu(batch_norm(conv3x3_same(t, blk.conv), blk.bn));
}

Tensor3 bbmg_forward(const Tensor3& e_box, const Tensor3& e_boundary, const PointwiseConv& dc1,
                     const CbrBlock& blk) {
    if (e_box.channels() != e_boundary.channels() || e_box.height() != e_boundary.height() ||
        e_box.width() != e_boundary.width()) {
        throw ShapeError("bbmg.concat: box embedding " + e_box.shape_string() +
                         " and boundary embedding " + e_boundary.shape_string() + " differ");
    }
    const int c = e_box.channels();
    if (dc1.in_channels != 2 * c || dc1.out_channels != c) {
        throw ShapeError("bbmg.dc1: expected " + std::to_string(2 * c) + "->" + std::to_string(c) +
                         ", got " + std::to_string(dc1.in_channels) + "->" +
                         std::to_string(dc1.out_channels));
    }
    if (blk.conv.in_channels != c || blk.conv.out_channels != c) {
        throw ShapeError("bbmg.cbr: expected " + std::to_string(c) + "->" + std::to_string(c) +
                         ", got " + std::to_string(blk.conv.in_channels) + "->" +
                         std::to_string(blk.conv.out_channels));
    }
    const Tensor3 em = pointwise_conv(concat_channels(e_box, e_boundary), dc1);
    return concat_channels(cbr(em, blk), em);
}

Tensor3 ode_forward(const Tensor3& hf, const Tensor3& obb, const PointwiseConv& dc2) {
    if (hf.height() != obb.height() || hf.width() != obb.width()) {
        throw ShapeError("ode.concat: HF " + hf.shape_string() + " and OBB " + obb.shape_string() +
                         " differ spatially");
    }
    if (dc2.in_channels != hf.channels() + obb.channels()) {
        throw ShapeError("ode.dc2: expected " + std::to_string(hf.channels() + obb.channels()) +
                         " input channels, got " + std::to_string(dc2.in_channels));
    }
    return pointwise_conv(concat_channels(hf, obb), dc2);
}

FusionWeights seeded_weights(const FusionPlan& plan, std::uint64_t seed) {
    Uniform rng(seed);
    const int c = plan.embed_channels;
    FusionWeights w;
    w.dc1 = seeded_pointwise(2 * c, c, rng);

    w.cbr.conv = {c, c, std::vector<double>(static_cast<std::size_t>(c) * c * 9), std::vector<double>(c)};
    const double bound = 1.0 / std::sqrt(static_cast<double>(c) * 9.0);
    for (double& v : w.cbr.conv.weights) v = rng(-bound, bound);
    for (double& v : w.cbr.conv.bias) v = rng(-bound, bound);
    w.cbr.bn.gamma.resize(c);
    w.cbr.bn.beta.resize(c);
    w.cbr.bn.running_mean.resize(c);
    w.cbr.bn.running_var.resize(c);
    for (int i = 0; i < c; ++i) {
        w.cbr.bn.gamma[i] = rng(0.5, 1.5);
        w.cbr.bn.beta[i] = rng(-0.1, 0.1);
        w.cbr.bn.running_mean[i] = rng(-0.1, 0.1);
        w.cbr.bn.running_var[i] = rng(0.5, 1.5);
    }
    w.cbr.bn.epsilon = static_cast<float>(1e-5);
    w.dc2 = seeded_pointwise(plan.hf_channels + 2 * c, plan.out_channels, rng);
    return w;
}

Tensor3 seeded_tensor(int channels, int height, int width, std::uint64_t seed) {
    Uniform rng(seed);
    Tensor3 t(channels, height, width);
    for (double& v : t.data()) v = rng(-1.0, 1.0);
    return t;
}

void save_weights(const FusionWeights& w, const std::filesystem::path& npz) {
    using Shape = std::vector<std::uint64_t>;
    auto u = [](int v) { return static_cast<std::uint64_t>(v); };
    auto rec = [](const char* name, Shape shape, const std::vector<double>& v) {
        return ArrayRecord::from_doubles(name, DType::F32, std::move(shape), v);
    };
    const int c = w.cbr.conv.out_channels;
    std::vector<ArrayRecord> records{
        rec("dc1.weight", {u(w.dc1.out_channels), u(w.dc1.in_channels)}, w.dc1.weights),
        rec("dc1.bias", {u(w.dc1.out_channels)}, w.dc1.bias),
        rec("cbr.conv.weight", {u(c), u(w.cbr.conv.in_channels), 3, 3}, w.cbr.conv.weights),
        rec("cbr.conv.bias", {u(c)}, w.cbr.conv.bias),
        rec("cbr.bn.weight", {u(c)}, w.cbr.bn.gamma),
        rec("cbr.bn.bias", {u(c)}, w.cbr.bn.beta),
        rec("cbr.bn.running_mean", {u(c)}, w.cbr.bn.running_mean),
        rec("cbr.bn.running_var", {u(c)}, w.cbr.bn.running_var),
        rec("cbr.bn.eps", {}, std::vector<double>{w.cbr.bn.epsilon}),
        rec("dc2.weight", {u(w.dc2.out_channels), u(w.dc2.in_channels)}, w.dc2.weights),
        rec("dc2.bias", {u(w.dc2.out_channels)}, w.dc2.bias),
    };
    write_npz(records, npz);
}

FusionWeights load_weights(const std::filesystem::path& npz) {
    std::map<std::string, ArrayRecord> by_name;
    for (auto& r : read_npz(npz)) by_name.emplace(r.name, std::move(r));
    auto get = [&](const std::string& name, std::size_t rank) -> const ArrayRecord& {
        const auto it = by_name.find(name);
        if (it == by_name.end()) throw FormatError(npz.string() + ": missing array " + name);
        if (it->second.shape.size() != rank) {
            throw FormatError(npz.string() + ": array " + name + " has rank " +
                              std::to_string(it->second.shape.size()));
        }
        return it->second;
    };
    FusionWeights w;
    const auto& dc1w = get("dc1.weight", 2);
    w.dc1 = {static_cast<int>(dc1w.shape[1]), static_cast<int>(dc1w.shape[0]), dc1w.to_doubles(),
             get("dc1.bias", 1).to_doubles()};
    const auto& cw = get("cbr.conv.weight", 4);
    if (cw.shape[2] != 3 || cw.shape[3] != 3) throw FormatError("cbr.conv.weight must be 3x3");
    w.cbr.conv = {static_cast<int>(cw.shape[1]), static_cast<int>(cw.shape[0]), cw.to_doubles(),
                  get("cbr.conv.bias", 1).to_doubles()};
    w.cbr.bn.gamma = get("cbr.bn.weight", 1).to_doubles();
    w.cbr.bn.beta = get("cbr.bn.bias", 1).to_doubles();
    w.cbr.bn.running_mean = get("cbr.bn.running_mean", 1).to_doubles();
    w.cbr.bn.running_var = get("cbr.bn.running_var", 1).to_doubles();
    w.cbr.bn.epsilon = get("cbr.bn.eps", 0).to_doubles().front();
    const auto& dc2w = get("dc2.weight", 2);
    w.dc2 = {static_cast<int>(dc2w.shape[1]), static_cast<int>(dc2w.shape[0]), dc2w.to_doubles(),
             get("dc2.bias", 1).to_doubles()};
    w.dc1.validate();
    w.cbr.conv.validate();
    w.cbr.bn.validate(w.cbr.conv.out_channels);
    w.dc2.validate();
    return w;
}

}  // namespace campro
