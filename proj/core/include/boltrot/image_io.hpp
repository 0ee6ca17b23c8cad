#pragma once

// 8-bit lossless raster I/O: binary PGM (P5), binary PPM (P6) and PNG.
// The format is chosen from the file extension.

#include <filesystem>
#include <string_view>

#include "boltrot/image.hpp"

namespace boltrot {

GrayImage read_gray(const std::filesystem::path& path);
RgbImage read_rgb(const std::filesystem::path& path);

void write_gray(const std::filesystem::path& path, const GrayImage& img);
void write_rgb(const std::filesystem::path& path, const RgbImage& img);
void write_binary(const std::filesystem::path& path, const BinaryImage& img);

/// Round-to-nearest 8-bit quantization of a luminance value.
std::uint8_t to_u8(double v) noexcept;

/// Writes `contents` to a sibling temp file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

}  // namespace boltrot
