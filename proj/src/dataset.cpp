#include "campro/dataset.hpp"

#include <algorithm>
#include <cctype>

#include "campro/error.hpp"

namespace campro {
namespace fs = std::filesystem;

bool is_image_file(const fs::path& path) {
    std::string ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return ext == ".png" || ext == ".jpg" || ext == ".jpeg" || ext == ".pgm" || ext == ".ppm" ||
           ext == ".pnm";
}

std::map<std::string, fs::path> list_stems(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw IoError("not a directory: " + dir.string());
    std::map<std::string, fs::path> out;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file() || !is_image_file(entry.path())) continue;
        const std::string stem = entry.path().stem().string();
        const auto [it, inserted] = out.emplace(stem, entry.path());
        if (!inserted) {
            throw ShapeError("duplicate stem '" + stem + "' in " + dir.string() + ": " +
                             it->second.filename().string() + " and " +
                             entry.path().filename().string());
        }
    }
    return out;
}

std::vector<PairedItem> pair_items(const DatasetManifest& manifest, bool require_images) {
    const auto gts = list_stems(manifest.gt_dir);
    std::map<std::string, fs::path> images;
    std::map<std::string, fs::path> preds;
    std::map<std::string, fs::path> edges;
    if (manifest.image_dir) images = list_stems(*manifest.image_dir);
    if (manifest.pred_dir) preds = list_stems(*manifest.pred_dir);
    if (manifest.edge_dir) edges = list_stems(*manifest.edge_dir);

    if (require_images) {
        if (!manifest.image_dir) throw IoError("this command needs an image directory");
        std::vector<std::string> problems;
        for (const auto& [stem, _] : gts) {
            if (!images.contains(stem)) problems.push_back("GT '" + stem + "' has no image");
        }
        for (const auto& [stem, _] : images) {
            if (!gts.contains(stem)) problems.push_back("image '" + stem + "' has no GT");
        }
        if (!problems.empty()) {
            std::string msg = "dataset stems do not match:";
            for (const auto& p : problems) msg += "\n  " + p;
            throw ShapeError(msg);
        }
    }

    std::vector<PairedItem> items;
    items.reserve(gts.size());
    auto find = [](const std::map<std::string, fs::path>& m, const std::string& stem) {
        const auto it = m.find(stem);
        return it == m.end() ? std::optional<fs::path>{} : std::optional<fs::path>{it->second};
    };
    for (const auto& [stem, gt] : gts) {
        items.push_back({stem, gt, find(images, stem), find(preds, stem), find(edges, stem)});
    }
    return items;
}

}  // namespace campro
