#pragma once

// Batch drivers behind the campro command line. Every command is a pure
// function of (manifest, config); output tables carry no timestamps, so
// reruns are byte-identical whatever the worker count.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "campro/boundary.hpp"
#include "campro/dataset.hpp"
#include "campro/fusion.hpp"
#include "campro/metrics.hpp"
#include "campro/table.hpp"
#include "campro/wavelet.hpp"

namespace campro {

struct RunConfig {
    EgemMode mode = EgemMode::Binary;
    int d1 = 3;
    int d2 = 5;
    ThresholdSpec threshold;
    Subband subband = Subband::HH;
    MetricConfig metrics;
    CannyParams canny;
    int jitter = 0;
    std::filesystem::path cache_root = ".campro-cache";
    int workers = 1;
    std::uint64_t seed = 0;
    TableFormat format = TableFormat::Markdown;

    [[nodiscard]] DilatePair dilate_pair() const;
    void validate() const;
    /// Sorted-key JSON of everything that can change an emitted value
    /// (cache root, worker count and output format excluded).
    [[nodiscard]] std::string canonical() const;
};

/// Runs fn(0..n-1) on up to `workers` threads. fn must not throw.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn);

struct BatchSummary {
    std::size_t total = 0;
    std::size_t produced = 0;
    std::size_t cached = 0;
    std::size_t skipped = 0;
    std::size_t failed = 0;
    /// Items whose prompt came out with no set pixel.
    std::size_t empty = 0;
    Table table;

    [[nodiscard]] bool ok() const noexcept { return failed == 0; }
};

/// Box and gradient-boundary prompt for every image/GT pair.
BatchSummary cmd_precompute(const DatasetManifest& manifest, const RunConfig& cfg);

/// Inference-time boundary prompt from each external edge map, optionally
/// also written as PNG into `png_out`.
BatchSummary cmd_prompt_gen(const DatasetManifest& manifest, const RunConfig& cfg,
                            const std::optional<std::filesystem::path>& png_out = {});

/// Haar subbands of every image, cached; PNG views (affine-stretched) when
/// `png_out` is given.
BatchSummary cmd_dwt(const DatasetManifest& manifest, const RunConfig& cfg,
                     const std::optional<std::filesystem::path>& png_out = {});

struct EvalResult {
    MetricReport report;
    BatchSummary summary;
};

/// Metrics of predictions against GT at GT resolution.
EvalResult cmd_eval(const DatasetManifest& manifest, const RunConfig& cfg);

enum class AblationAxis { Dilate, Offset, Subband };

AblationAxis parse_ablation_axis(const std::string& text);

struct GridPoint {
    std::string label;
    std::string setting;
    RunConfig cfg;
};

/// The sweep for one axis, every other field copied from `base`.
std::vector<GridPoint> ablation_grid(AblationAxis axis, const RunConfig& base);
std::vector<std::string> ablation_columns(AblationAxis axis);

/// One row per grid point. Metric columns come from <pred_dir>/<label>/
/// when that directory exists.
BatchSummary cmd_ablate(const DatasetManifest& manifest, const RunConfig& cfg, AblationAxis axis);

struct FuseSmokeResult {
    Tensor3 em;
    Tensor3 obb;
    Tensor3 hf;
    Tensor3 ode;
    /// Stage names whose check failed, in pipeline order.
    std::vector<std::string> failures;
    Table table;

    [[nodiscard]] bool ok() const noexcept { return failures.empty(); }
};

/// Runs the fusion chain on seeded embeddings with the weight bundle from
/// the cache (generated from cfg.seed on first use).
FuseSmokeResult cmd_fuse_smoke(const RunConfig& cfg, const FusionPlan& plan);

}  // namespace campro
