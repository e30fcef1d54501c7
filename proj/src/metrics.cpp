#include "campro/metrics.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <numeric>

#include "campro/fingerprint.hpp"
#include "json.hpp"

namespace campro {

namespace {

constexpr double kEps = DBL_EPSILON;

void require_same_shape(const FloatMap& pred, const BinaryMask& gt, const char* what) {
    if (!pred.same_shape(gt)) {
        throw ShapeError(std::string(what) + ": prediction " + std::to_string(pred.width()) + "x" +
                         std::to_string(pred.height()) + " vs GT " + std::to_string(gt.width()) +
                         "x" + std::to_string(gt.height()));
    }
}

std::size_t count_set(const BinaryMask& m) {
    return static_cast<std::size_t>(std::count(m.data().begin(), m.data().end(), std::uint8_t{1}));
}

// 2 * mean / (mean^2 + 1 + std + eps) over the pixels selected by `region`.
double object_score(const std::vector<double>& values) {
    if (values.empty()) return 0.0;
    const double n = static_cast<double>(values.size());
    const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
    double sd = 0.0;
    if (values.size() > 1) {
        double ss = 0.0;
        for (double v : values) ss += (v - mean) * (v - mean);
        sd = std::sqrt(ss / (n - 1.0));
    }
    return 2.0 * mean / (mean * mean + 1.0 + sd + kEps);
}

double s_object(const FloatMap& pred, const BinaryMask& gt) {
    std::vector<double> fg;
    std::vector<double> bg;
    auto p = pred.data();
    auto g = gt.data();
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (g[i]) {
            fg.push_back(p[i]);
        } else {
            bg.push_back(1.0 - p[i]);
        }
    }
    const double u = static_cast<double>(fg.size()) / static_cast<double>(p.size());
    return u * object_score(fg) + (1.0 - u) * object_score(bg);
}

// SSIM-style agreement of one rectangular region [x0,x1) x [y0,y1).
double region_ssim(const FloatMap& pred, const BinaryMask& gt, int x0, int x1, int y0, int y1) {
    const double n = static_cast<double>(x1 - x0) * (y1 - y0);
    double sx = 0.0;
    double sy = 0.0;
    for (int y = y0; y < y1; ++y) {
        for (int x = x0; x < x1; ++x) {
            sx += pred.at(x, y);
            sy += gt.at(x, y);
        }
    }
    const double mx = sx / n;
    const double my = sy / n;
    double vx = 0.0;
    double vy = 0.0;
    double cxy = 0.0;
    for (int y = y0; y < y1; ++y) {
        for (int x = x0; x < x1; ++x) {
            const double dx = pred.at(x, y) - mx;
            const double dy = gt.at(x, y) - my;
            vx += dx * dx;
            vy += dy * dy;
            cxy += dx * dy;
        }
    }
    const double denom = n - 1.0 + kEps;
    vx /= denom;
    vy /= denom;
    cxy /= denom;
    const double alpha = 4.0 * mx * my * cxy;
    const double beta = (mx * mx + my * my) * (vx + vy);
    if (alpha != 0.0) return alpha / (beta + kEps);
    if (beta == 0.0) return 1.0;
    return 0.0;
}

double s_region(const FloatMap& pred, const BinaryMask& gt) {
    const int w = gt.width();
    const int h = gt.height();
    double total = 0.0;
    double sum_x = 0.0;
    double sum_y = 0.0;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (!gt.at(x, y)) continue;
            total += 1.0;
            sum_x += x + 1;
            sum_y += y + 1;
        }
    }
    // 1-based centroid rounded half away from zero; splits at [0,cx) / [cx,w)
    const int cx = static_cast<int>(std::round(sum_x / total));
    const int cy = static_cast<int>(std::round(sum_y / total));
    const double area = static_cast<double>(w) * h;
    const double w1 = static_cast<double>(cx) * cy / area;
    const double w2 = static_cast<double>(w - cx) * cy / area;
    const double w3 = static_cast<double>(cx) * (h - cy) / area;
    const double w4 = 1.0 - w1 - w2 - w3;

    auto part = [&](double weight, int x0, int x1, int y0, int y1) {
        if (x1 <= x0 || y1 <= y0) return 0.0;
        return weight * region_ssim(pred, gt, x0, x1, y0, y1);
    };
    return part(w1, 0, cx, 0, cy) + part(w2, cx, w, 0, cy) + part(w3, 0, cx, cy, h) +
           part(w4, cx, w, cy, h);
}

double mean_of(const FloatMap& pred) {
    return std::accumulate(pred.data().begin(), pred.data().end(), 0.0) /
           static_cast<double>(pred.size());
}

}  // namespace

void MetricConfig::validate() const {
    if (!(s_alpha >= 0.0 && s_alpha <= 1.0)) throw InvalidRangeError("s_alpha must lie in [0,1]");
    if (!(wfm_beta2 > 0.0)) throw InvalidRangeError("wfm beta^2 must be positive");
    if (wfm_blur_ksize < 1 || wfm_blur_ksize % 2 == 0) {
        throw InvalidKernelError("wfm blur size must be odd");
    }
    if (!(wfm_blur_sigma > 0.0)) throw InvalidRangeError("wfm blur sigma must be positive");
    if (!(wfm_decay_base > 0.0 && wfm_decay_base < 1.0)) {
        throw InvalidRangeError("wfm decay base must lie in (0,1)");
    }
    if (!(wfm_decay_scale > 0.0)) throw InvalidRangeError("wfm decay scale must be positive");
    if (e_levels < 1) throw InvalidRangeError("E-measure needs at least one level");
    if (!(dice_threshold >= 0.0 && dice_threshold <= 1.0)) {
        throw InvalidRangeError("dice threshold must lie in [0,1]");
    }
}

std::string MetricConfig::canonical() const {
    nlohmann::json j;
    j["s_alpha"] = s_alpha;
    j["wfm_beta2"] = wfm_beta2;
    j["wfm_blur_ksize"] = wfm_blur_ksize;
    j["wfm_blur_sigma"] = wfm_blur_sigma;
    j["wfm_decay_base"] = wfm_decay_base;
    j["wfm_decay_scale"] = wfm_decay_scale;
    j["e_levels"] = e_levels;
    j["dice_threshold"] = dice_threshold;
    j["dice_mode"] = dice_mode == DiceMode::Binarized ? "binarized" : "continuous";
    return j.dump();
}

std::string MetricConfig::fingerprint() const { return campro::fingerprint(canonical()); }

double mae(const FloatMap& pred, const BinaryMask& gt) {
    require_same_shape(pred, gt, "mae");
    auto p = pred.data();
    auto g = gt.data();
    double sum = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) sum += std::abs(p[i] - g[i]);
    return sum / static_cast<double>(p.size());
}

double s_measure(const FloatMap& pred, const BinaryMask& gt, const MetricConfig& cfg) {
    require_same_shape(pred, gt, "s_measure");
    const std::size_t fg = count_set(gt);
    double s = 0.0;
    if (fg == 0) {
        s = 1.0 - mean_of(pred);
    } else if (fg == gt.size()) {
        s = mean_of(pred);
    } else {
        s = cfg.s_alpha * s_object(pred, gt) + (1.0 - cfg.s_alpha) * s_region(pred, gt);
    }
    return std::clamp(s, 0.0, 1.0);
}

double e_measure_mean(const FloatMap& pred, const BinaryMask& gt, const MetricConfig& cfg) {
    require_same_shape(pred, gt, "e_measure");
    const int levels = cfg.e_levels;
    // passes[k]: pixels above level k, split by GT class. A value p exceeds
    // k/levels exactly for k < ceil(p * levels).
    std::vector<std::size_t> fg_hist(levels + 1, 0);
    std::vector<std::size_t> bg_hist(levels + 1, 0);
    auto p = pred.data();
    auto g = gt.data();
    for (std::size_t i = 0; i < p.size(); ++i) {
        int passed = 0;
        if (p[i] > 0.0) passed = static_cast<int>(std::min<double>(levels, std::ceil(p[i] * levels)));
        (g[i] ? fg_hist : bg_hist)[passed]++;
    }
    const double n = static_cast<double>(p.size());
    const std::size_t gt_fg = count_set(gt);
    const double mean_gt = static_cast<double>(gt_fg) / n;

    auto enhanced = [](double a, double b) {
        const double align = 2.0 * a * b / (a * a + b * b + kEps);
        return (align + 1.0) * (align + 1.0) / 4.0;
    };

    // pixels passing level k = those with passed > k; accumulate from the top
    std::size_t tp = 0;
    std::size_t fp = 0;
    double total = 0.0;
    for (int k = levels - 1; k >= 0; --k) {
        tp += fg_hist[k + 1];
        fp += bg_hist[k + 1];
        const std::size_t pred_fg = tp + fp;
        double score = 0.0;
        if (gt_fg == 0) {
            score = (n - static_cast<double>(pred_fg)) / n;
        } else if (gt_fg == p.size()) {
            score = static_cast<double>(pred_fg) / n;
        } else {
            const double fn = static_cast<double>(gt_fg - tp);
            const double tn = n - static_cast<double>(tp) - static_cast<double>(fp) - fn;
            const double mean_pred = static_cast<double>(pred_fg) / n;
            const double p1 = 1.0 - mean_pred;
            const double p0 = -mean_pred;
            const double g1 = 1.0 - mean_gt;
            const double g0 = -mean_gt;
            score = (static_cast<double>(tp) * enhanced(p1, g1) + static_cast<double>(fp) * enhanced(p1, g0) +
                     fn * enhanced(p0, g1) + tn * enhanced(p0, g0)) /
                    n;
        }
        total += score;
    }
    return std::clamp(total / levels, 0.0, 1.0);
}

double weighted_fmeasure(const FloatMap& pred, const BinaryMask& gt, const MetricConfig& cfg) {
    require_same_shape(pred, gt, "weighted_fmeasure");
    const std::size_t fg = count_set(gt);
    if (fg == 0) throw UndefinedMetricError("weighted F-measure is undefined for an empty GT");

    const int w = gt.width();
    const int h = gt.height();
    const std::size_t n = gt.size();
    auto p = pred.data();
    auto g = gt.data();

    std::vector<double> err(n);
    for (std::size_t i = 0; i < n; ++i) err[i] = std::abs(p[i] - g[i]);

    // background pixels borrow the error of their nearest foreground pixel
    const NearestMap nearest = nearest_set_pixel(gt);
    RealPlane borrowed(w, h);
    auto bo = borrowed.data();
    for (std::size_t i = 0; i < n; ++i) {
        bo[i] = g[i] ? err[i] : err[static_cast<std::size_t>(nearest.nearest[i])];
    }
    const RealPlane blurred = gaussian_blur(borrowed, cfg.wfm_blur_ksize, cfg.wfm_blur_sigma);
    auto ea = blurred.data();

    const double decay = std::log(cfg.wfm_decay_base) / cfg.wfm_decay_scale;
    double fg_err = 0.0;
    double bg_err = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (g[i]) {
            fg_err += ea[i] < err[i] ? ea[i] : err[i];
        } else {
            const double dist = std::sqrt(static_cast<double>(nearest.squared[i]));
            bg_err += err[i] * (2.0 - std::exp(decay * dist));
        }
    }
    const double fg_count = static_cast<double>(fg);
    const double tp = fg_count - fg_err;
    const double recall = 1.0 - fg_err / fg_count;
    const double precision = tp / (kEps + tp + bg_err);
    const double q = (1.0 + cfg.wfm_beta2) * recall * precision /
                     (kEps + recall + cfg.wfm_beta2 * precision);
    return std::clamp(q, 0.0, 1.0);
}

DiceIou dice_iou(const FloatMap& pred, const BinaryMask& gt, const MetricConfig& cfg) {
    require_same_shape(pred, gt, "dice_iou");
    auto p = pred.data();
    auto g = gt.data();
    double inter = 0.0;
    double sum_p = 0.0;
    double sum_g = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double a = cfg.dice_mode == DiceMode::Binarized ? (p[i] >= cfg.dice_threshold ? 1.0 : 0.0)
                                                              : p[i];
        inter += a * g[i];
        sum_p += a;
        sum_g += g[i];
    }
    if (sum_p + sum_g == 0.0) return {1.0, 1.0};
    const double iou = inter / (sum_p + sum_g - inter);
    // binary overlaps derive Dice from IoU so dice = 2 iou / (1 + iou) holds bit for bit
    if (cfg.dice_mode == DiceMode::Binarized) return {2.0 * iou / (1.0 + iou), iou};
    return {2.0 * inter / (sum_p + sum_g), iou};
}

bool MetricRecord::complete() const {
    return std::all_of(values.begin(), values.end(), [](const auto& v) { return v.has_value(); });
}

MetricRecord evaluate_pair(const std::string& id, const FloatMap& pred, const BinaryMask& gt,
                           const MetricConfig& cfg) {
    MetricRecord rec;
    rec.id = id;
    rec.config_fingerprint = cfg.fingerprint();
    auto attempt = [&](Metric m, auto&& fn) {
        try {
            rec.values[static_cast<int>(m)] = fn();
        } catch (const Error& e) {
            rec.notes.push_back(std::string(metric_name(m)) + ": " + e.what());
        }
    };
    attempt(Metric::SAlpha, [&] { return s_measure(pred, gt, cfg); });
    attempt(Metric::WeightedF, [&] { return weighted_fmeasure(pred, gt, cfg); });
    attempt(Metric::EPhi, [&] { return e_measure_mean(pred, gt, cfg); });
    attempt(Metric::Mae, [&] { return mae(pred, gt); });
    try {
        const DiceIou di = dice_iou(pred, gt, cfg);
        rec.values[static_cast<int>(Metric::Dice)] = di.dice;
        rec.values[static_cast<int>(Metric::Iou)] = di.iou;
    } catch (const Error& e) {
        rec.notes.push_back(std::string("dice/iou: ") + e.what());
    }
    return rec;
}

MetricReport aggregate(std::vector<MetricRecord> records) {
    MetricReport report;
    std::array<double, kMetricCount> sums{};
    for (const auto& r : records) {
        for (int m = 0; m < kMetricCount; ++m) {
            if (r.values[m]) {
                sums[m] += *r.values[m];
                ++report.counted[m];
            }
        }
        if (!r.complete()) ++report.skipped;
    }
    bool any = false;
    for (int m = 0; m < kMetricCount; ++m) {
        if (report.counted[m] > 0) {
            report.mean[m] = sums[m] / static_cast<double>(report.counted[m]);
            any = true;
        }
    }
    if (!any) throw EmptyInputError("aggregate: no record carries any metric");
    report.count = records.size();
    report.per_image = std::move(records);
    return report;
}

const char* metric_name(Metric m) noexcept {
    switch (m) {
        case Metric::SAlpha: return "S_alpha";
        case Metric::WeightedF: return "F_beta_w";
        case Metric::EPhi: return "E_phi";
        case Metric::Mae: return "MAE";
        case Metric::Dice: return "mDice";
        case Metric::Iou: return "mIoU";
    }
    return "?";
}

}  // namespace campro
