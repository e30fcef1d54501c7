// campro: prompt precomputation, subband extraction, fusion smoke runs,
// evaluation and ablation sweeps over paired image directories.
//
// Exit status: 0 success, 1 when any item failed, 2 on usage or
// pre-flight errors (bad flags, mismatched stems, missing directories).

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <cstdio>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "campro/cache.hpp"
#include "campro/commands.hpp"
#include "campro/error.hpp"

namespace fs = std::filesystem;
using namespace campro;

namespace {

struct Options {
    std::string dataset = "dataset";
    std::string images, gts, preds, edges;
    std::string cache = ".campro-cache";
    std::string mode = "binary";
    std::string subband = "HH";
    std::string format = "md";
    std::string out;
    std::string png_out;
    std::string axis;
    std::string scale = "desk";
    int channels = 8;
    int size = 16;
    bool dice_continuous = false;
    RunConfig cfg;
};

void emit(const Table& table, const Options& opt, TableFormat format) {
    const std::string text = table.render(format);
    if (opt.out.empty()) {
        std::cout << text;
        return;
    }
    if (fs::path(opt.out).has_parent_path()) fs::create_directories(fs::path(opt.out).parent_path());
    std::ofstream f(opt.out, std::ios::binary);
    if (!f) throw IoError("cannot write " + opt.out);
    f << text;
}

DatasetManifest manifest_of(const Options& opt) {
    DatasetManifest m;
    m.name = opt.dataset;
    if (opt.gts.empty()) throw IoError("--gts is required");
    m.gt_dir = opt.gts;
    if (!opt.images.empty()) m.image_dir = fs::path(opt.images);
    if (!opt.preds.empty()) m.pred_dir = fs::path(opt.preds);
    if (!opt.edges.empty()) m.edge_dir = fs::path(opt.edges);
    return m;
}

RunConfig finish_config(Options& opt) {
    RunConfig cfg = opt.cfg;
    cfg.mode = parse_egem_mode(opt.mode);
    cfg.subband = parse_subband(opt.subband);
    cfg.format = parse_table_format(opt.format);
    cfg.cache_root = resolve_cache_root(opt.cache);
    if (opt.dice_continuous) cfg.metrics.dice_mode = DiceMode::Continuous;
    cfg.validate();
    return cfg;
}

void add_common(CLI::App* sub, Options& opt) {
    sub->add_option("--dataset", opt.dataset, "dataset name used in cache paths");
    sub->add_option("--cache", opt.cache, "cache root (CAMPRO_CACHE overrides)");
    sub->add_option("--workers", opt.cfg.workers, "worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--seed", opt.cfg.seed, "seed recorded in every summary");
    sub->add_option("--format", opt.format, "table format: csv or md");
    sub->add_option("--out", opt.out, "write the table here instead of stdout");
}

void add_prompt_opts(CLI::App* sub, Options& opt) {
    sub->add_option("--d1", opt.cfg.d1, "inner dilation kernel");
    sub->add_option("--d2", opt.cfg.d2, "outer dilation kernel");
    sub->add_option("--mode", opt.mode, "gradient boundary mode: binary or magnitude");
    sub->add_option("--offset", opt.cfg.threshold.offset, "edge-map threshold offset above the mode");
    sub->add_option("--jitter", opt.cfg.jitter, "grow boxes by this many pixels");
    sub->add_option("--canny-sigma", opt.cfg.canny.sigma, "Canny Gaussian sigma");
    sub->add_option("--canny-low", opt.cfg.canny.low, "Canny low threshold, 0..255 scale");
    sub->add_option("--canny-high", opt.cfg.canny.high, "Canny high threshold, 0..255 scale");
}

void add_dirs(CLI::App* sub, Options& opt) {
    sub->add_option("--images", opt.images, "image directory");
    sub->add_option("--gts", opt.gts, "ground-truth mask directory");
    sub->add_option("--preds", opt.preds, "prediction directory");
    sub->add_option("--edges", opt.edges, "edge map directory");
}

int status_of(bool ok) { return ok ? 0 : 1; }

}  // namespace

int main(int argc, char** argv) {
    spdlog::set_pattern("%l: %v");
    CLI::App app{"campro: boundary and box prompt tooling, fusion checks and COD metrics"};
    app.require_subcommand(1);
    Options opt;

    auto* pre = app.add_subcommand("precompute", "cache box and gradient-boundary prompts");
    auto* gen = app.add_subcommand("prompt-gen", "inference boundary prompts from edge maps");
    auto* dwt = app.add_subcommand("dwt", "Haar subbands of every image");
    auto* eval = app.add_subcommand("eval", "score predictions against GT");
    auto* abl = app.add_subcommand("ablate", "dilate, offset or subband sweep");
    auto* fuse = app.add_subcommand("fuse-smoke", "run the fusion chain on seeded embeddings");
    for (auto* sub : {pre, gen, dwt, eval, abl, fuse}) add_common(sub, opt);
    for (auto* sub : {pre, gen, dwt, eval, abl}) add_dirs(sub, opt);
    for (auto* sub : {pre, gen, abl}) add_prompt_opts(sub, opt);
    for (auto* sub : {gen, dwt}) sub->add_option("--png-out", opt.png_out, "write PNG views here");
    for (auto* sub : {eval, abl}) {
        sub->add_flag("--dice-continuous", opt.dice_continuous, "soft Dice/IoU instead of binarised");
    }
    for (auto* sub : {abl, fuse}) sub->add_option("--subband", opt.subband, "LL, LH, HL or HH");
    abl->add_option("--axis", opt.axis, "dilate, offset or subband")->required();
    fuse->add_option("--scale", opt.scale, "desk or reference");
    fuse->add_option("--channels", opt.channels, "desk-scale channels");
    fuse->add_option("--size", opt.size, "desk-scale spatial size");

    CLI11_PARSE(app, argc, argv);

    try {
        RunConfig cfg = finish_config(opt);
        const auto png = opt.png_out.empty() ? std::optional<fs::path>{} : std::optional<fs::path>{opt.png_out};
        if (pre->parsed()) {
            const auto s = cmd_precompute(manifest_of(opt), cfg);
            emit(s.table, opt, cfg.format);
            return status_of(s.ok());
        }
        if (gen->parsed()) {
            const auto s = cmd_prompt_gen(manifest_of(opt), cfg, png);
            emit(s.table, opt, cfg.format);
            return status_of(s.ok());
        }
        if (dwt->parsed()) {
            DatasetManifest m;
            m.name = opt.dataset;
            if (opt.images.empty()) throw IoError("--images is required");
            m.image_dir = fs::path(opt.images);
            const auto s = cmd_dwt(m, cfg, png);
            emit(s.table, opt, cfg.format);
            return status_of(s.ok());
        }
        if (eval->parsed()) {
            const auto r = cmd_eval(manifest_of(opt), cfg);
            emit(r.summary.table, opt, cfg.format);
            return status_of(r.summary.ok());
        }
        if (abl->parsed()) {
            const auto s = cmd_ablate(manifest_of(opt), cfg, parse_ablation_axis(opt.axis));
            emit(s.table, opt, cfg.format);
            return status_of(s.ok());
        }
        if (fuse->parsed()) {
            FusionPlan plan;
            if (opt.scale == "reference") {
                plan = FusionPlan::reference();
            } else if (opt.scale == "desk") {
                plan = FusionPlan::desk(opt.channels, opt.size);
            } else {
                throw InvalidRangeError("unknown scale '" + opt.scale + "'");
            }
            const auto r = cmd_fuse_smoke(cfg, plan);
            emit(r.table, opt, cfg.format);
            for (const auto& stage : r.failures) spdlog::error("stage {} failed", stage);
            return status_of(r.ok());
        }
    } catch (const Error& e) {
        spdlog::error("{}", e.what());
        return 2;
    } catch (const std::filesystem::filesystem_error& e) {
        spdlog::error("{}", e.what());
        return 2;
    }
    return 2;
}
