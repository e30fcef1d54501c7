#pragma once

// NPY v1.0 array files (byte-identical to numpy.save for the supported
// dtypes) and uncompressed npz bundles.

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace campro {

enum class DType { U8, F32, F64 };

std::size_t element_size(DType dtype) noexcept;
/// numpy descr string: "|u1", "<f4", "<f8".
std::string_view descr(DType dtype) noexcept;

struct ArrayRecord {
    std::string name;
    DType dtype = DType::F64;
    std::vector<std::uint64_t> shape;
    /// Raw little-endian element bytes, C order.
    std::vector<std::uint8_t> bytes;

    [[nodiscard]] std::uint64_t element_count() const noexcept;
    /// Throws FormatError when the buffer length disagrees with the shape.
    void validate() const;

    /// Element values widened to double.
    [[nodiscard]] std::vector<double> to_doubles() const;

    static ArrayRecord from_doubles(std::string name, DType dtype, std::vector<std::uint64_t> shape,
                                    std::span<const double> values);
    static ArrayRecord from_u8(std::string name, std::vector<std::uint64_t> shape,
                               std::span<const std::uint8_t> values);

    friend bool operator==(const ArrayRecord&, const ArrayRecord&) = default;
};

std::vector<std::uint8_t> encode_npy(const ArrayRecord& rec);
/// `source` only labels error messages.
ArrayRecord decode_npy(std::span<const std::uint8_t> file, const std::string& source = "<memory>");

void write_array(const ArrayRecord& rec, const std::filesystem::path& path);
ArrayRecord read_array(const std::filesystem::path& path);

/// Stored (uncompressed) zip of "<name>.npy" members in the given order.
void write_npz(const std::vector<ArrayRecord>& records, const std::filesystem::path& path);
/// Reads stored or deflated members, including numpy's zip64 variant.
std::vector<ArrayRecord> read_npz(const std::filesystem::path& path);

}  // namespace campro
