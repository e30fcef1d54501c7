#include "campro/commands.hpp"

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include "json.hpp"
#include <thread>

#include "campro/cache.hpp"
#include "campro/error.hpp"
#include "campro/fingerprint.hpp"
#include "campro/image_io.hpp"

namespace campro {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kStageEgem = "egem";
constexpr const char* kStageBox = "box";
constexpr const char* kStageBoundary = "boundary";
constexpr const char* kStageDwt = "dwt";

json canny_json(const CannyParams& p) { return {{"sigma", p.sigma}, {"low", p.low}, {"high", p.high}}; }

std::uint64_t u64(int v) { return static_cast<std::uint64_t>(v); }

template <class R>
double support_fraction(const R& r) {
    auto d = r.data();
    const auto n = std::count_if(d.begin(), d.end(), [](auto v) { return v > 0; });
    return static_cast<double>(n) / static_cast<double>(d.size());
}

template <class A, class B>
double support_dice(const A& a, const B& b) {
    auto da = a.data();
    auto db = b.data();
    std::size_t na = 0, nb = 0, both = 0;
    for (std::size_t i = 0; i < da.size(); ++i) {
        const bool x = da[i] > 0;
        const bool y = db[i] > 0;
        na += x;
        nb += y;
        both += x && y;
    }
    if (na + nb == 0) return 1.0;
    return 2.0 * static_cast<double>(both) / static_cast<double>(na + nb);
}

FloatMap map_from_record(const ArrayRecord& rec) {
    if (rec.shape.size() != 2) throw FormatError("expected a 2-D array in cache entry");
    return FloatMap(static_cast<int>(rec.shape[1]), static_cast<int>(rec.shape[0]), rec.to_doubles());
}

ArrayRecord record_from_map(const std::string& name, const FloatMap& m) {
    return ArrayRecord::from_doubles(name, DType::F64, {u64(m.height()), u64(m.width())}, m.data());
}

ArrayRecord record_from_box(const BoundingBox& b) {
    const std::vector<double> v{double(b.x0), double(b.y0), double(b.x1), double(b.y1)};
    return ArrayRecord::from_doubles(kStageBox, DType::F64, {4}, v);
}

BoundingBox box_from_record(const ArrayRecord& rec) {
    const auto v = rec.to_doubles();
    if (v.size() != 4) throw FormatError("box entry must hold 4 values");
    return {int(v[0]), int(v[1]), int(v[2]), int(v[3])};
}

std::string box_text(const BoundingBox& b) { return fmt::format("{} {} {} {}", b.x0, b.y0, b.x1, b.y1); }

std::string join_notes(const std::vector<std::string>& notes) {
    std::string out;
    for (const auto& n : notes) out += (out.empty() ? "" : "; ") + n;
    return out;
}

void require_same_shape(const auto& a, const auto& b, const std::string& what) {
    if (a.width() != b.width() || a.height() != b.height()) {
        throw ShapeError(fmt::format("{}: {}x{} vs {}x{}", what, a.width(), a.height(), b.width(),
                                     b.height()));
    }
}

std::vector<std::string> base_metadata(const std::string& command, const DatasetManifest& manifest,
                                       const RunConfig& cfg) {
    return {"command: " + command, "dataset: " + manifest.name, fmt::format("seed: {}", cfg.seed),
            "config: " + cfg.canonical(), "config_fingerprint: " + fingerprint(cfg.canonical())};
}

enum class Status { Produced, Cached, Skipped, Failed };

const char* status_text(Status s) {
    switch (s) {
        case Status::Produced: return "produced";
        case Status::Cached: return "cached";
        case Status::Skipped: return "skipped";
        case Status::Failed: return "failed";
    }
    return "?";
}

void tally(BatchSummary& s, Status st) {
    ++s.total;
    switch (st) {
        case Status::Produced: ++s.produced; break;
        case Status::Cached: ++s.cached; break;
        case Status::Skipped: ++s.skipped; break;
        case Status::Failed: ++s.failed; break;
    }
}

std::string counts_line(const BatchSummary& s) {
    return fmt::format("items: {} produced: {} cached: {} skipped: {} failed: {}", s.total, s.produced,
                       s.cached, s.skipped, s.failed);
}

// Gradient-boundary prompt and box for one pair, through the cache.
struct EgemOutcome {
    FloatMap prompt;
    BoundingBox box;
    bool cached = false;
};

EgemOutcome egem_cached(const ArrayCache& cache, const std::string& dataset, const PairedItem& item,
                        const RunConfig& cfg) {
    const std::string gt_digest = file_sha256(item.gt);
    const std::string img_digest = file_sha256(*item.image);
    const CacheKey egem_key{dataset, item.stem, kStageEgem,
                            json{{"mode", std::string(to_string(cfg.mode))},
                                 {"d1", cfg.d1},
                                 {"d2", cfg.d2},
                                 {"canny", canny_json(cfg.canny)},
                                 {"gt", gt_digest},
                                 {"image", img_digest}}
                                .dump()};
    const CacheKey box_key{dataset, item.stem, kStageBox,
                           json{{"jitter", cfg.jitter}, {"gt", gt_digest}}.dump()};

    auto prompt_rec = cache.lookup(egem_key);
    auto box_rec = cache.lookup(box_key);
    if (prompt_rec && box_rec) return {map_from_record(*prompt_rec), box_from_record(*box_rec), true};

    const BinaryMask gt = read_mask(item.gt);
    EgemOutcome out;
    out.box = extract_box(gt, cfg.jitter);
    if (prompt_rec) {
        out.prompt = map_from_record(*prompt_rec);
    } else {
        const GrayImage img = read_gray(*item.image);
        require_same_shape(gt, img, "image and GT differ in size");
        out.prompt = egem(gt, img, cfg.dilate_pair(), cfg.mode, cfg.canny);
        cache.store(egem_key, record_from_map(kStageEgem, out.prompt));
    }
    if (!box_rec) cache.store(box_key, record_from_box(out.box));
    return out;
}

struct BoundaryOutcome {
    FloatMap boundary;
    int threshold = 0;
    bool cached = false;
    bool unit_gradient = false;
};

BoundaryOutcome boundary_cached(const ArrayCache& cache, const std::string& dataset,
                                const PairedItem& item, const RunConfig& cfg) {
    const GrayImage edge = read_gray(*item.edge);
    BoundaryOutcome out;
    out.threshold = inference_threshold(edge, cfg.threshold);
    out.unit_gradient = !item.image.has_value();
    const CacheKey key{dataset, item.stem, kStageBoundary,
                       json{{"offset", cfg.threshold.offset},
                            {"jitter", cfg.jitter},
                            {"gradient", out.unit_gradient ? "unit" : "canny-magnitude"},
                            {"canny", canny_json(cfg.canny)},
                            {"gt", file_sha256(item.gt)},
                            {"edge", file_sha256(*item.edge)},
                            {"image", item.image ? file_sha256(*item.image) : ""}}
                           .dump()};
    if (auto rec = cache.lookup(key)) {
        out.boundary = map_from_record(*rec);
        out.cached = true;
        return out;
    }
    const BinaryMask gt = read_mask(item.gt);
    require_same_shape(gt, edge, "edge map and GT differ in size");
    FloatMap gradient(edge.width(), edge.height(), 1.0);
    if (item.image) {
        const GrayImage img = read_gray(*item.image);
        require_same_shape(gt, img, "image and GT differ in size");
        gradient = canny(img, cfg.canny).magnitude;
    }
    out.boundary = generate_inference_boundary(edge, extract_box(gt, cfg.jitter), gradient, cfg.threshold);
    cache.store(key, record_from_map(kStageBoundary, out.boundary));
    return out;
}

RealPlane unit_plane(const GrayImage& img) {
    RealPlane p(img.width(), img.height());
    auto src = img.data();
    auto dst = p.data();
    for (std::size_t i = 0; i < src.size(); ++i) dst[i] = src[i] / 255.0;
    return p;
}

double mean_square(const RealPlane& p) {
    double s = 0.0;
    for (double v : p.data()) s += v * v;
    return s / static_cast<double>(p.data().size());
}

GrayImage stretch(const RealPlane& p) {
    auto d = p.data();
    const auto [lo, hi] = std::minmax_element(d.begin(), d.end());
    GrayImage out(p.width(), p.height());
    const double span = *hi - *lo;
    if (span <= 0.0) return out;
    auto o = out.data();
    for (std::size_t i = 0; i < d.size(); ++i) {
        o[i] = static_cast<std::uint8_t>(std::lround((d[i] - *lo) / span * 255.0));
    }
    return out;
}

constexpr std::array<Subband, 4> kSubbands{Subband::LL, Subband::LH, Subband::HL, Subband::HH};

// Per-image metrics for every GT item; shared by eval and ablation.
struct EvalRun {
    std::vector<MetricRecord> records;
    std::vector<Status> status;
};

EvalRun evaluate_items(const std::vector<PairedItem>& items, const fs::path& pred_dir,
                       const RunConfig& cfg) {
    const auto preds = list_stems(pred_dir);
    EvalRun run;
    run.records.resize(items.size());
    run.status.resize(items.size());
    parallel_for(items.size(), cfg.workers, [&](std::size_t i) {
        const PairedItem& item = items[i];
        MetricRecord& rec = run.records[i];
        rec.id = item.stem;
        rec.config_fingerprint = cfg.metrics.fingerprint();
        const auto it = preds.find(item.stem);
        if (it == preds.end()) {
            rec.notes.push_back("missing prediction");
            run.status[i] = Status::Skipped;
            return;
        }
        try {
            const BinaryMask gt = read_mask(item.gt);
            GrayImage pred = read_gray(it->second);
            if (pred.width() != gt.width() || pred.height() != gt.height()) {
                pred = resize_bilinear(pred, gt.width(), gt.height());
            }
            rec = evaluate_pair(item.stem, to_float_map(pred), gt, cfg.metrics);
            run.status[i] = Status::Produced;
        } catch (const std::exception& e) {
            rec.notes.push_back(e.what());
            run.status[i] = Status::Failed;
        }
    });
    return run;
}

std::optional<MetricReport> try_aggregate(std::vector<MetricRecord> records) {
    try {
        return aggregate(std::move(records));
    } catch (const EmptyInputError&) {
        return std::nullopt;
    }
}

}  // namespace

DilatePair RunConfig::dilate_pair() const { return DilatePair(Kernel(d1), Kernel(d2)); }

void RunConfig::validate() const {
    (void)dilate_pair();
    metrics.validate();
    if (workers < 1) throw InvalidRangeError("workers must be >= 1");
    if (jitter < 0) throw InvalidRangeError("jitter must be >= 0");
    if (canny.sigma <= 0.0) throw InvalidRangeError("canny sigma must be positive");
    if (canny.low < 0.0 || canny.high < canny.low) {
        throw InvalidThresholdError("canny thresholds need 0 <= low <= high");
    }
}

std::string RunConfig::canonical() const {
    json j;
    j["mode"] = std::string(to_string(mode));
    j["d1"] = d1;
    j["d2"] = d2;
    j["offset"] = threshold.offset;
    j["subband"] = std::string(to_string(subband));
    j["metrics"] = json::parse(metrics.canonical());
    j["canny"] = canny_json(canny);
    j["jitter"] = jitter;
    j["seed"] = seed;
    return j.dump();
}

void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn) {
    const std::size_t threads = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(workers, 1)));
    if (threads <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
        });
    }
}

BatchSummary cmd_precompute(const DatasetManifest& manifest, const RunConfig& cfg) {
    cfg.validate();
    const auto items = pair_items(manifest, true);
    const ArrayCache cache(cfg.cache_root);

    struct Row {
        Status status = Status::Failed;
        std::optional<BoundingBox> box;
        std::optional<double> density;
        std::string note;
    };
    std::vector<Row> rows(items.size());
    parallel_for(items.size(), cfg.workers, [&](std::size_t i) {
        try {
            const EgemOutcome out = egem_cached(cache, manifest.name, items[i], cfg);
            rows[i] = {out.cached ? Status::Cached : Status::Produced, out.box, support_fraction(out.prompt), ""};
        } catch (const std::exception& e) {
            spdlog::error("precompute {}: {}", items[i].stem, e.what());
            rows[i].note = e.what();
        }
    });

    BatchSummary s;
    s.table.columns = {"stem", "status", "box", "prompt_density", "note"};
    for (std::size_t i = 0; i < items.size(); ++i) {
        const Row& r = rows[i];
        tally(s, r.status);
        if (r.density && *r.density == 0.0) ++s.empty;
        s.table.rows.push_back({items[i].stem, std::string(status_text(r.status)),
                                r.box ? Cell{box_text(*r.box)} : Cell{}, optional_cell(r.density), r.note});
    }
    s.table.metadata = base_metadata("precompute", manifest, cfg);
    s.table.metadata.push_back(counts_line(s));
    return s;
}

BatchSummary cmd_prompt_gen(const DatasetManifest& manifest, const RunConfig& cfg,
                            const std::optional<fs::path>& png_out) {
    cfg.validate();
    if (!manifest.edge_dir) throw IoError("prompt-gen needs an edge map directory");
    const auto items = pair_items(manifest, false);
    const ArrayCache cache(cfg.cache_root);
    if (png_out) fs::create_directories(*png_out);

    struct Row {
        Status status = Status::Failed;
        std::optional<double> threshold;
        std::optional<double> density;
        std::string note;
    };
    std::vector<Row> rows(items.size());
    parallel_for(items.size(), cfg.workers, [&](std::size_t i) {
        const PairedItem& item = items[i];
        Row& r = rows[i];
        if (!item.edge) {
            r.status = Status::Skipped;
            r.note = "missing edge map";
            return;
        }
        try {
            const BoundaryOutcome out = boundary_cached(cache, manifest.name, item, cfg);
            r.status = out.cached ? Status::Cached : Status::Produced;
            r.threshold = out.threshold;
            r.density = support_fraction(out.boundary);
            if (out.unit_gradient) r.note = "no image, unit gradient";
            if (png_out) write_png(to_gray(out.boundary), *png_out / (item.stem + ".png"));
        } catch (const std::exception& e) {
            spdlog::error("prompt-gen {}: {}", item.stem, e.what());
            r.status = Status::Failed;
            r.note = e.what();
        }
    });

    BatchSummary s;
    s.table.columns = {"stem", "status", "threshold", "prompt_density", "note"};
    std::size_t generated = 0;
    for (std::size_t i = 0; i < items.size(); ++i) {
        const Row& r = rows[i];
        tally(s, r.status);
        if (r.density) {
            ++generated;
            if (*r.density == 0.0) ++s.empty;
        }
        s.table.rows.push_back({items[i].stem, std::string(status_text(r.status)),
                                optional_cell(r.threshold), optional_cell(r.density), r.note});
    }
    s.table.metadata = base_metadata("prompt-gen", manifest, cfg);
    s.table.metadata.push_back(counts_line(s));
    const double pct = generated ? 100.0 * static_cast<double>(s.empty) / static_cast<double>(generated) : 0.0;
    s.table.metadata.push_back(fmt::format("empty prompts: {}/{} ({:.1f}%)", s.empty, generated, pct));
    return s;
}

BatchSummary cmd_dwt(const DatasetManifest& manifest, const RunConfig& cfg,
                     const std::optional<fs::path>& png_out) {
    cfg.validate();
    if (!manifest.image_dir) throw IoError("dwt needs an image directory");
    std::vector<std::pair<std::string, fs::path>> items;
    for (const auto& kv : list_stems(*manifest.image_dir)) items.push_back(kv);
    const ArrayCache cache(cfg.cache_root);
    if (png_out) fs::create_directories(*png_out);

    struct Row {
        Status status = Status::Failed;
        int width = 0;
        int height = 0;
        std::array<double, 4> energy{};
        std::string note;
    };
    std::vector<Row> rows(items.size());
    parallel_for(items.size(), cfg.workers, [&](std::size_t i) {
        const auto& [stem, path] = items[i];
        Row& r = rows[i];
        try {
            const GrayImage img = read_gray(path);
            r.width = img.width();
            r.height = img.height();
            const CacheKey key{manifest.name, stem, kStageDwt, json{{"image", file_sha256(path)}}.dump()};
            const Subbands sb = dwt2_haar(unit_plane(img));
            const int hw = sb.ll.width();
            const int hh = sb.ll.height();
            if (cache.lookup(key)) {
                r.status = Status::Cached;
            } else {
                std::vector<double> stacked;
                stacked.reserve(4 * sb.ll.data().size());
                for (Subband b : kSubbands) {
                    auto d = select_subband(sb, b).data();
                    stacked.insert(stacked.end(), d.begin(), d.end());
                }
                cache.store(key, ArrayRecord::from_doubles(kStageDwt, DType::F64, {4, u64(hh), u64(hw)}, stacked));
                r.status = Status::Produced;
            }
            for (std::size_t b = 0; b < kSubbands.size(); ++b) {
                const RealPlane& plane = select_subband(sb, kSubbands[b]);
                r.energy[b] = mean_square(plane);
                if (png_out) {
                    write_png(stretch(plane),
                              *png_out / (stem + "_" + std::string(to_string(kSubbands[b])) + ".png"));
                }
            }
        } catch (const std::exception& e) {
            spdlog::error("dwt {}: {}", stem, e.what());
            r.status = Status::Failed;
            r.note = e.what();
        }
    });

    BatchSummary s;
    s.table.columns = {"stem", "status", "width", "height", "LL_energy", "LH_energy", "HL_energy",
                       "HH_energy", "note"};
    for (std::size_t i = 0; i < items.size(); ++i) {
        const Row& r = rows[i];
        tally(s, r.status);
        std::vector<Cell> row{items[i].first, std::string(status_text(r.status))};
        if (r.status == Status::Failed) {
            row.insert(row.end(), 6, Cell{});
        } else {
            row.push_back(double(r.width));
            row.push_back(double(r.height));
            for (double e : r.energy) row.push_back(e);
        }
        row.push_back(r.note);
        s.table.rows.push_back(std::move(row));
    }
    s.table.metadata = base_metadata("dwt", manifest, cfg);
    s.table.metadata.push_back(counts_line(s));
    return s;
}

EvalResult cmd_eval(const DatasetManifest& manifest, const RunConfig& cfg) {
    cfg.validate();
    if (!manifest.pred_dir) throw IoError("eval needs a prediction directory");
    const auto items = pair_items(manifest, false);
    EvalRun run = evaluate_items(items, *manifest.pred_dir, cfg);

    EvalResult result;
    BatchSummary& s = result.summary;
    s.table.columns = {"id"};
    for (int m = 0; m < kMetricCount; ++m) s.table.columns.emplace_back(metric_name(static_cast<Metric>(m)));
    s.table.columns.emplace_back("note");
    for (std::size_t i = 0; i < items.size(); ++i) {
        tally(s, run.status[i]);
        const MetricRecord& rec = run.records[i];
        std::vector<Cell> row{rec.id};
        for (const auto& v : rec.values) row.push_back(optional_cell(v));
        row.emplace_back(join_notes(rec.notes));
        s.table.rows.push_back(std::move(row));
    }
    if (auto report = try_aggregate(run.records)) {
        result.report = std::move(*report);
    } else {
        result.report.per_image = run.records;
        result.report.count = run.records.size();
        result.report.skipped = run.records.size();
    }
    std::vector<Cell> mean_row{std::string("mean")};
    for (const auto& v : result.report.mean) mean_row.push_back(optional_cell(v));
    mean_row.emplace_back(fmt::format("{} of {} complete", result.report.count - result.report.skipped,
                                      result.report.count));
    s.table.rows.push_back(std::move(mean_row));

    s.table.metadata = base_metadata("eval", manifest, cfg);
    s.table.metadata.push_back("metric_config: " + cfg.metrics.canonical());
    s.table.metadata.push_back("resolution: GT native; predictions resized bilinearly when sizes differ");
    s.table.metadata.push_back(counts_line(s));
    return result;
}

AblationAxis parse_ablation_axis(const std::string& text) {
    if (text == "dilate") return AblationAxis::Dilate;
    if (text == "offset") return AblationAxis::Offset;
    if (text == "subband") return AblationAxis::Subband;
    throw InvalidRangeError("unknown ablation axis '" + text + "' (dilate, offset, subband)");
}

std::vector<GridPoint> ablation_grid(AblationAxis axis, const RunConfig& base) {
    std::vector<GridPoint> grid;
    switch (axis) {
        case AblationAxis::Dilate: {
            constexpr std::array<std::pair<int, int>, 5> pairs{{{3, 3}, {3, 5}, {5, 5}, {5, 7}, {7, 7}}};
            for (std::size_t i = 0; i < pairs.size(); ++i) {
                RunConfig c = base;
                c.d1 = pairs[i].first;
                c.d2 = pairs[i].second;
                grid.push_back({fmt::format("D{}", i + 1), fmt::format("({},{})", c.d1, c.d2), c});
            }
            break;
        }
        case AblationAxis::Offset:
            for (int off = 5; off <= 25; off += 5) {
                RunConfig c = base;
                c.threshold.offset = off;
                grid.push_back({fmt::format("+{}", off), std::to_string(off), c});
            }
            break;
        case AblationAxis::Subband:
            for (Subband b : kSubbands) {
                RunConfig c = base;
                c.subband = b;
                grid.push_back({std::string(to_string(b)), std::string(to_string(b)), c});
            }
            break;
    }
    return grid;
}

std::vector<std::string> ablation_columns(AblationAxis axis) {
    std::vector<std::string> cols;
    switch (axis) {
        case AblationAxis::Dilate: cols = {"run", "dilate", "band_coverage", "prompt_density"}; break;
        case AblationAxis::Offset: cols = {"run", "offset", "prompt_density", "band_dice"}; break;
        case AblationAxis::Subband: cols = {"run", "subband", "energy"}; break;
    }
    for (const char* m : {"S_alpha", "F_beta_w", "E_phi", "MAE", "note"}) cols.emplace_back(m);
    return cols;
}

BatchSummary cmd_ablate(const DatasetManifest& manifest, const RunConfig& cfg, AblationAxis axis) {
    cfg.validate();
    const bool needs_images = axis != AblationAxis::Offset;
    if (axis == AblationAxis::Offset && !manifest.edge_dir) {
        throw IoError("the offset sweep needs an edge map directory");
    }
    const auto items = pair_items(manifest, needs_images);
    const ArrayCache cache(cfg.cache_root);
    constexpr std::size_t kStats = 2;

    BatchSummary s;
    s.table.columns = ablation_columns(axis);
    for (const GridPoint& point : ablation_grid(axis, cfg)) {
        const RunConfig& rc = point.cfg;
        std::vector<std::array<std::optional<double>, kStats>> stats(items.size());
        std::vector<std::string> errors(items.size());
        parallel_for(items.size(), rc.workers, [&](std::size_t i) {
            const PairedItem& item = items[i];
            try {
                switch (axis) {
                    case AblationAxis::Dilate: {
                        const EgemOutcome out = egem_cached(cache, manifest.name, item, rc);
                        stats[i][0] = support_fraction(boundary_band(read_mask(item.gt), rc.dilate_pair()));
                        stats[i][1] = support_fraction(out.prompt);
                        break;
                    }
                    case AblationAxis::Offset: {
                        if (!item.edge) throw IoError("missing edge map");
                        const BoundaryOutcome out = boundary_cached(cache, manifest.name, item, rc);
                        stats[i][0] = support_fraction(out.boundary);
                        stats[i][1] = support_dice(out.boundary, boundary_band(read_mask(item.gt), rc.dilate_pair()));
                        break;
                    }
                    case AblationAxis::Subband: {
                        const Subbands sb = dwt2_haar(unit_plane(read_gray(*item.image)));
                        stats[i][0] = mean_square(select_subband(sb, rc.subband));
                        break;
                    }
                }
            } catch (const std::exception& e) {
                errors[i] = item.stem + ": " + e.what();
            }
        });

        std::array<double, kStats> sums{};
        std::array<std::size_t, kStats> counts{};
        std::size_t failed = 0;
        std::string first_error;
        for (std::size_t i = 0; i < items.size(); ++i) {
            if (!errors[i].empty()) {
                if (failed++ == 0) first_error = errors[i];
                continue;
            }
            for (std::size_t k = 0; k < kStats; ++k) {
                if (stats[i][k]) {
                    sums[k] += *stats[i][k];
                    ++counts[k];
                }
            }
        }
        std::vector<std::string> notes;
        if (failed) notes.push_back(fmt::format("{} item(s) failed, first: {}", failed, first_error));

        std::vector<Cell> row{point.label, point.setting};
        const std::size_t stat_cols = axis == AblationAxis::Subband ? 1 : 2;
        for (std::size_t k = 0; k < stat_cols; ++k) {
            row.push_back(counts[k] ? Cell{sums[k] / static_cast<double>(counts[k])} : Cell{});
        }
        std::array<std::optional<double>, 4> metric_cells{};
        if (manifest.pred_dir && fs::is_directory(*manifest.pred_dir / point.label)) {
            EvalRun run = evaluate_items(items, *manifest.pred_dir / point.label, rc);
            const auto bad = std::count(run.status.begin(), run.status.end(), Status::Failed);
            if (bad) notes.push_back(fmt::format("{} prediction(s) unreadable", bad));
            if (auto report = try_aggregate(std::move(run.records))) {
                metric_cells = {report->mean[int(Metric::SAlpha)], report->mean[int(Metric::WeightedF)],
                                report->mean[int(Metric::EPhi)], report->mean[int(Metric::Mae)]};
                if (report->skipped) notes.push_back(fmt::format("{} image(s) incomplete", report->skipped));
            }
            failed += static_cast<std::size_t>(bad);
        }
        for (const auto& m : metric_cells) row.push_back(optional_cell(m));
        row.emplace_back(join_notes(notes));
        s.table.rows.push_back(std::move(row));
        tally(s, failed ? Status::Failed : Status::Produced);
    }
    s.table.metadata = base_metadata("ablate", manifest, cfg);
    const char* axis_name = axis == AblationAxis::Dilate ? "dilate" : axis == AblationAxis::Offset ? "offset" : "subband";
    s.table.metadata.push_back(std::string("axis: ") + axis_name);
    s.table.metadata.push_back(fmt::format("images: {}", items.size()));
    return s;
}

FuseSmokeResult cmd_fuse_smoke(const RunConfig& cfg, const FusionPlan& plan) {
    const json plan_json{{"embed_channels", plan.embed_channels}, {"hf_channels", plan.hf_channels},
                         {"out_channels", plan.out_channels},     {"height", plan.height},
                         {"width", plan.width},                   {"seed", cfg.seed}};
    const std::string weights_fp = fingerprint(plan_json.dump());
    const fs::path bundle = cfg.cache_root / "fusion" / ("weights." + weights_fp + ".npz");
    if (!fs::exists(bundle)) {
        fs::create_directories(bundle.parent_path());
        const fs::path tmp = bundle.string() + ".tmp";
        save_weights(seeded_weights(plan, cfg.seed), tmp);
        fs::rename(tmp, bundle);
    }
    const FusionWeights w = load_weights(bundle);

    const int c = plan.embed_channels;
    const Tensor3 e_box = seeded_tensor(c, plan.height, plan.width, cfg.seed + 1);
    const Tensor3 e_boundary = seeded_tensor(c, plan.height, plan.width, cfg.seed + 2);
    const Tensor3 image_embedding = seeded_tensor(plan.hf_channels, plan.height, plan.width, cfg.seed + 3);

    FuseSmokeResult r;
    r.table.columns = {"stage", "shape", "sum", "checksum", "status"};
    auto record = [&](const std::string& stage, const Tensor3& t, int ec, std::string status) {
        if (status.empty()) {
            if (t.channels() != ec || t.height() != plan.height || t.width() != plan.width) {
                status = fmt::format("expected ({},{},{})", ec, plan.height, plan.width);
            } else if (!t.all_finite()) {
                status = "non-finite values";
            } else {
                status = "ok";
            }
        }
        if (status != "ok") r.failures.push_back(stage);
        double sum = 0.0;
        for (double v : t.data()) sum += v;
        const auto d = t.data();
        const std::string digest = sha256_hex(std::span<const std::uint8_t>(
                                                  reinterpret_cast<const std::uint8_t*>(d.data()), d.size_bytes()))
                                       .substr(0, 16);
        r.table.rows.push_back({stage, t.shape_string(), sum, digest, status});
    };
    auto fail = [&](const std::string& stage, const std::string& msg) {
        r.failures.push_back(stage);
        r.table.rows.push_back({stage, Cell{}, Cell{}, Cell{}, msg});
    };

    try {
        r.em = pointwise_conv(concat_channels(e_box, e_boundary), w.dc1);
        record("bbmg.dc1", r.em, c, "");
        r.obb = bbmg_forward(e_box, e_boundary, w.dc1, w.cbr);
        std::string status;
        if (r.obb.channels() == 2 * c && !(r.obb.slice_channels(c, 2 * c) == r.em)) {
            status = "residual channels differ from EM";
        }
        record("bbmg.obb", r.obb, 2 * c, status);
        r.hf = frequency_component(image_embedding, cfg.subband);
        record("hf." + std::string(to_string(cfg.subband)), r.hf, plan.hf_channels, "");
        r.ode = ode_forward(r.hf, r.obb, w.dc2);
        record("ode.dc2", r.ode, plan.out_channels, "");
    } catch (const Error& e) {
        fail("fusion", e.what());
    }

    r.table.metadata = {"command: fuse-smoke", fmt::format("seed: {}", cfg.seed),
                        "plan: " + plan_json.dump(), "weights_fingerprint: " + weights_fp};
    return r;
}

}  // namespace campro
