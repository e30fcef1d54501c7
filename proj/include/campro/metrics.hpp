#pragma once

// Segmentation quality measures used for camouflaged-object and polyp
// benchmarks: structure measure, weighted F-measure, mean enhanced-alignment
// measure, MAE, Dice and IoU.
//
// Degenerate-GT conventions (taken from the reference MATLAB toolboxes):
//   * S-measure, GT all background: S = 1 - mean(pred).
//   * S-measure, GT all foreground: S = mean(pred).
//   * E-measure, GT all background: per level, score = fraction of pixels
//     predicted background; GT all foreground: fraction predicted foreground.
//   * Weighted F-measure, GT all background: undefined, reported as skipped.
//   * Dice/IoU with both masks empty: 1.
// Quadrant SSIM normalises by (N - 1 + eps), object scores use the sample
// standard deviation (0 for a single pixel), and eps is DBL_EPSILON
// everywhere, as in the reference code. The E-measure averages the enhanced
// alignment over all pixels (divides by N) at the 256 levels pred > k/256.

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "campro/raster.hpp"

namespace campro {

enum class DiceMode { Binarized, Continuous };

struct MetricConfig {
    double s_alpha = 0.5;
    double wfm_beta2 = 1.0;
    int wfm_blur_ksize = 7;
    double wfm_blur_sigma = 5.0;
    double wfm_decay_base = 0.5;
    double wfm_decay_scale = 5.0;
    int e_levels = 256;
    double dice_threshold = 0.5;
    DiceMode dice_mode = DiceMode::Binarized;

    void validate() const;
    /// Sorted-key JSON of every field; feeds the report fingerprint.
    [[nodiscard]] std::string canonical() const;
    [[nodiscard]] std::string fingerprint() const;
};

double mae(const FloatMap& pred, const BinaryMask& gt);
double s_measure(const FloatMap& pred, const BinaryMask& gt, const MetricConfig& cfg = {});
double e_measure_mean(const FloatMap& pred, const BinaryMask& gt, const MetricConfig& cfg = {});
/// Throws UndefinedMetricError on an empty GT.
double weighted_fmeasure(const FloatMap& pred, const BinaryMask& gt, const MetricConfig& cfg = {});

struct DiceIou {
    double dice = 0.0;
    double iou = 0.0;
};
DiceIou dice_iou(const FloatMap& pred, const BinaryMask& gt, const MetricConfig& cfg = {});

enum class Metric { SAlpha, WeightedF, EPhi, Mae, Dice, Iou };
inline constexpr int kMetricCount = 6;

struct MetricRecord {
    std::string id;
    std::string config_fingerprint;
    /// Indexed by Metric; empty when the metric was skipped.
    std::array<std::optional<double>, kMetricCount> values{};
    std::vector<std::string> notes;

    [[nodiscard]] const std::optional<double>& get(Metric m) const {
        return values[static_cast<int>(m)];
    }
    [[nodiscard]] bool complete() const;
};

/// All six metrics; per-metric failures become skips with a note.
MetricRecord evaluate_pair(const std::string& id, const FloatMap& pred, const BinaryMask& gt,
                           const MetricConfig& cfg = {});

struct MetricReport {
    std::vector<MetricRecord> per_image;
    /// Mean per metric over records where it is present.
    std::array<std::optional<double>, kMetricCount> mean{};
    std::array<std::size_t, kMetricCount> counted{};
    std::size_t count = 0;
    /// Records missing at least one metric.
    std::size_t skipped = 0;
};

/// Throws EmptyInputError when no record carries any metric.
MetricReport aggregate(std::vector<MetricRecord> records);

const char* metric_name(Metric m) noexcept;

}  // namespace campro
