#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace phreg {

// 8-bit RGB raster, interleaved, row-major.
struct RgbImage
{
	int width{0};
	int height{0};
	std::vector<std::uint8_t> pixels;

	RgbImage() = default;
	RgbImage(int w, int h);

	std::uint8_t* at(int x, int y) { return &pixels[(static_cast<std::size_t>(y) * width + x) * 3]; }
	const std::uint8_t* at(int x, int y) const { return &pixels[(static_cast<std::size_t>(y) * width + x) * 3]; }

	bool operator==(const RgbImage&) const = default;
};

// Luminance raster; samples.size() == width * height, both >= 1.
struct GrayImage
{
	int width{0};
	int height{0};
	std::vector<std::uint8_t> samples;

	bool operator==(const GrayImage&) const = default;
};

// Throws InvalidImageError when the buffer is not a decodable PNG/JPEG.
RgbImage decode_image(std::span<const std::uint8_t> encoded);
RgbImage load_image(const std::filesystem::path& path);

std::vector<std::uint8_t> encode_png(const RgbImage& image);
std::vector<std::uint8_t> encode_jpeg(const RgbImage& image, int quality);

// Format chosen by extension (.png, .jpg/.jpeg). Throws StorageError.
void save_image(const std::filesystem::path& path, const RgbImage& image);

// Integer BT.601: Y = (299 R + 587 G + 114 B + 500) / 1000.
GrayImage to_luma(const RgbImage& image);

// Separable triangle-filter ("bilinear") resampling. When shrinking, the
// filter support widens with the scale factor so every source pixel
// contributes. Output is unrounded, row-major, out_w * out_h values.
std::vector<double> resample_bilinear(std::span<const double> src, int src_w, int src_h, int out_w, int out_h);

// Same filter on every RGB channel, rounded back to 8 bits.
RgbImage resize_bilinear(const RgbImage& image, int out_w, int out_h);

} // namespace phreg
