#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "lesionkit/image.hpp"

namespace lesion {

/// Decodes a PNG or JPEG stream to 8-bit RGB. Throws DecodeError for a
/// malformed stream and UnsupportedFormatError for unknown signatures or
/// color models that have no RGB interpretation (CMYK JPEG).
RasterImage decode_image(std::span<const std::uint8_t> bytes);

/// Decodes a mask image: any nonzero gray level is a set bit.
BinaryMask decode_mask(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> encode_png(const RasterImage& img);
/// 8-bit gray PNG with set bits written as 255.
std::vector<std::uint8_t> encode_png(const BinaryMask& mask);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
void write_text(const std::filesystem::path& path, const std::string& text);

RasterImage load_image(const std::filesystem::path& path);
BinaryMask load_mask(const std::filesystem::path& path);

}  // namespace lesion
