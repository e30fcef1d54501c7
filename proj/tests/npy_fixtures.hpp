#pragma once

#include <fstream>
#include <map>

#include "campro/error.hpp"
#include "campro/npy.hpp"
#include "json.hpp"

namespace campro::testing {

/// The arrays described by tests/data/npy/values.json, keyed by name.
inline std::map<std::string, ArrayRecord> fixture_records(const std::filesystem::path& values_json) {
    std::ifstream in(values_json);
    if (!in) throw IoError("cannot open " + values_json.string());
    const auto j = nlohmann::json::parse(in);
    std::map<std::string, ArrayRecord> out;
    for (const auto& [name, spec] : j.items()) {
        const std::string d = spec.at("dtype");
        const DType dtype = d == "|u1" ? DType::U8 : d == "<f4" ? DType::F32 : DType::F64;
        const auto shape = spec.at("shape").get<std::vector<std::uint64_t>>();
        const auto values = spec.at("values").get<std::vector<double>>();
        out.emplace(name, ArrayRecord::from_doubles(name, dtype, shape, values));
    }
    return out;
}

}  // namespace campro::testing
