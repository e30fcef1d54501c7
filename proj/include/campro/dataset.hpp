#pragma once

// Paired-directory datasets. Files are matched by their exact,
// case-sensitive basename without extension.

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace campro {

/// stem -> file for every image-like file directly inside `dir`.
/// Two files sharing a stem are an error.
std::map<std::string, std::filesystem::path> list_stems(const std::filesystem::path& dir);

bool is_image_file(const std::filesystem::path& path);

struct DatasetManifest {
    std::string name = "dataset";
    std::optional<std::filesystem::path> image_dir;
    std::filesystem::path gt_dir;
    std::optional<std::filesystem::path> pred_dir;
    std::optional<std::filesystem::path> edge_dir;
};

struct PairedItem {
    std::string stem;
    std::filesystem::path gt;
    std::optional<std::filesystem::path> image;
    std::optional<std::filesystem::path> pred;
    std::optional<std::filesystem::path> edge;
};

/// GT stems in sorted order with whatever companions exist. With
/// `require_images`, any GT lacking an image (or image lacking a GT) raises
/// a ShapeError listing every mismatch before work starts.
std::vector<PairedItem> pair_items(const DatasetManifest& manifest, bool require_images);

}  // namespace campro
