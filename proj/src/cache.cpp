#include "campro/cache.hpp"

#include <spdlog/spdlog.h>

#include <atomic>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

#include "campro/error.hpp"
#include "campro/fingerprint.hpp"

namespace campro {
namespace fs = std::filesystem;

namespace {

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return {};
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path temp_name(const fs::path& target) {
    static std::atomic<unsigned long> counter{0};
    std::ostringstream name;
    name << target.filename().string() << ".tmp." << std::hash<std::thread::id>{}(std::this_thread::get_id())
         << "." << counter.fetch_add(1);
    return target.parent_path() / name.str();
}

void atomic_write(const fs::path& target, const auto& write) {
    const fs::path tmp = temp_name(target);
    try {
        write(tmp);
        fs::rename(tmp, target);
    } catch (...) {
        std::error_code ec;
        fs::remove(tmp, ec);
        throw;
    }
}

void check_component(const std::string& value, const char* what) {
    if (value.empty() || value.find('/') != std::string::npos || value == "." || value == "..") {
        throw InvalidRangeError(std::string("cache key ") + what + " '" + value + "' is not a plain name");
    }
}

}  // namespace

std::string CacheKey::fingerprint() const { return campro::fingerprint(stage + "\n" + params); }

ArrayCache::ArrayCache(fs::path root) : root_(std::move(root)) {}

fs::path ArrayCache::path_for(const CacheKey& key) const {
    check_component(key.dataset, "dataset");
    check_component(key.stage, "stage");
    check_component(key.stem, "stem");
    return root_ / key.dataset / key.stage / (key.stem + "." + key.fingerprint() + ".npy");
}

std::optional<ArrayRecord> ArrayCache::lookup(const CacheKey& key) const {
    const fs::path path = path_for(key);
    if (!fs::exists(path)) return std::nullopt;
    fs::path sidecar = path;
    sidecar.replace_extension(".json");
    if (read_text(sidecar) != key.params) {
        spdlog::warn("cache entry {} has a mismatching parameter record; ignoring", path.string());
        return std::nullopt;
    }
    try {
        ArrayRecord rec = read_array(path);
        rec.name = key.stage;
        return rec;
    } catch (const Error& e) {
        spdlog::warn("corrupt cache entry {}: {}", path.string(), e.what());
        return std::nullopt;
    }
}

void ArrayCache::store(const CacheKey& key, const ArrayRecord& rec) const {
    const fs::path path = path_for(key);
    fs::create_directories(path.parent_path());
    fs::path sidecar = path;
    sidecar.replace_extension(".json");
    atomic_write(sidecar, [&](const fs::path& tmp) {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        out << key.params;
        if (!out) throw IoError("cannot write " + tmp.string());
    });
    atomic_write(path, [&](const fs::path& tmp) { write_array(rec, tmp); });
}

fs::path resolve_cache_root(const fs::path& from_flag) {
    if (const char* env = std::getenv("CAMPRO_CACHE"); env != nullptr && *env != '\0') return env;
    return from_flag;
}

}  // namespace campro
