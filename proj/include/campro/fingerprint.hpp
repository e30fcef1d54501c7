#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>

namespace campro {

/// Lower-case hex SHA-256.
std::string sha256_hex(std::span<const std::uint8_t> bytes);
std::string sha256_hex(std::string_view text);
std::string file_sha256(const std::filesystem::path& path);

/// First 16 hex digits of the SHA-256 of a canonical parameter record.
std::string fingerprint(std::string_view canonical);

}  // namespace campro
