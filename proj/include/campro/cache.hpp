#pragma once

// Content-addressed store of precomputed arrays:
//   <root>/<dataset>/<stage>/<stem>.<fingerprint>.npy
// next to a .json sidecar holding the canonical parameter record the
// fingerprint was derived from. Entries are written to a temporary file and
// renamed into place, so readers never see a partial entry.

#include <filesystem>
#include <optional>
#include <string>

#include "campro/npy.hpp"

namespace campro {

struct CacheKey {
    std::string dataset;
    std::string stem;
    std::string stage;
    /// Canonical serialisation of every parameter (and input digest) that
    /// influenced the stored value.
    std::string params;

    [[nodiscard]] std::string fingerprint() const;
};

class ArrayCache {
public:
    explicit ArrayCache(std::filesystem::path root);

    [[nodiscard]] const std::filesystem::path& root() const noexcept { return root_; }
    [[nodiscard]] std::filesystem::path path_for(const CacheKey& key) const;

    /// Present only when the entry exists, parses, and its sidecar matches
    /// the key's parameter record. Corrupt entries are logged and ignored.
    [[nodiscard]] std::optional<ArrayRecord> lookup(const CacheKey& key) const;
    void store(const CacheKey& key, const ArrayRecord& rec) const;

private:
    std::filesystem::path root_;
};

/// Applies the CAMPRO_CACHE override to a command-line cache root.
std::filesystem::path resolve_cache_root(const std::filesystem::path& from_flag);

}  // namespace campro
