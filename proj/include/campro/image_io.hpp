#pragma once

#include <filesystem>

#include "campro/raster.hpp"

namespace campro {

/// Loads PNG, JPEG, PGM/PPM as 8-bit gray. Colour input is reduced with
/// Rec.601 luma; alpha is dropped.
GrayImage read_gray(const std::filesystem::path& path);

/// GT masks: foreground where the stored intensity exceeds `threshold`.
BinaryMask read_mask(const std::filesystem::path& path, int threshold = 128);

/// Chooses PNG or PGM from the extension.
void write_gray(const GrayImage& img, const std::filesystem::path& path);
void write_png(const GrayImage& img, const std::filesystem::path& path);
void write_pgm(const GrayImage& img, const std::filesystem::path& path);

std::uint8_t rec601_luma(std::uint8_t r, std::uint8_t g, std::uint8_t b) noexcept;

}  // namespace campro
