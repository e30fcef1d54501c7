// Writes every fixture array (and an npz bundle) with the library so the
// numpy side can read them back: npy_writer <values.json> <out-dir>

#include <iostream>

#include "npy_fixtures.hpp"

int main(int argc, char** argv) {
    if (argc != 3) {
        std::cerr << "usage: npy_writer <values.json> <out-dir>\n";
        return 2;
    }
    try {
        const std::filesystem::path out = argv[2];
        std::filesystem::create_directories(out);
        const auto records = campro::testing::fixture_records(argv[1]);
        for (const auto& [name, rec] : records) campro::write_array(rec, out / (name + ".npy"));
        campro::write_npz({records.at("u8_2x3"), records.at("f32_2x2"), records.at("f64_3x4x5")},
                          out / "bundle.npz");
    } catch (const std::exception& e) {
        std::cerr << e.what() << "\n";
        return 1;
    }
    return 0;
}
