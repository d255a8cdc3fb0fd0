#pragma once

#include "phreg/hash.hpp"
#include "phreg/image.hpp"

#include <array>
#include <filesystem>
#include <span>

namespace phreg {

inline constexpr int phash_grid = 32;
inline constexpr int phash_block = 8;

// Unnormalized 2D DCT-II of a 32x32 grid, top-left 8x8 block, row-major
// (index = vertical_freq * 8 + horizontal_freq). Coefficients are rounded
// to 1e-6 so exact zero-frequency cases tie deterministically.
std::array<double, 64> low_frequency_dct(std::span<const double> grid);

// Bit i set iff coefficient i is strictly greater than the median of all 64
// coefficients (mean of the two middle values, DC included).
PerceptualHash binarize_coefficients(const std::array<double, 64>& coefficients);

// Luminance -> 32x32 bilinear -> DCT-II -> 8x8 block -> median threshold.
PerceptualHash compute_phash(const GrayImage& image);
PerceptualHash compute_phash(const RgbImage& image);
PerceptualHash compute_phash(std::span<const std::uint8_t> encoded);
PerceptualHash compute_phash_file(const std::filesystem::path& path);

} // namespace phreg
