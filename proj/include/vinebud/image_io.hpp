#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "vinebud/imaging.hpp"

namespace vinebud {

using Bytes = std::vector<std::uint8_t>;

// PNG or JPEG, sniffed from the signature. Throws DecodeError naming the byte
// offset at which the stream stopped making sense.
RgbImage decode_image(std::span<const std::uint8_t> bytes);
RgbImage read_image(const std::filesystem::path& path);

Bytes encode_png(const RgbImage& img);
Bytes encode_png(const Plane<std::uint8_t>& gray);
Bytes encode_jpeg(const RgbImage& img, int quality = 95);

// 1-bit grayscale PNG; any nonzero mask value is written as set.
Bytes encode_mask_png(const Mask& mask);
Mask decode_mask_png(std::span<const std::uint8_t> bytes);

// Quantises [0,1] intensities to 8 bits.
RgbImage to_rgb(const GrayImage& gray);

Bytes read_file(const std::filesystem::path& path);
// Writes to a sibling temporary and renames, so readers never see partial files.
void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace vinebud
