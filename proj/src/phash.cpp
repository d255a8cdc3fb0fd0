#include "phreg/phash.hpp"

#include "phreg/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace phreg {

namespace {

// cos(pi * (2n + 1) * k / 64) for k < 8, n < 32.
const std::array<std::array<double, phash_grid>, phash_block>& dct_basis()
{
	static const auto basis = [] {
		std::array<std::array<double, phash_grid>, phash_block> b{};
		for (int k = 0; k < phash_block; ++k)
			for (int n = 0; n < phash_grid; ++n)
				b[k][n] = std::cos(std::numbers::pi * (2 * n + 1) * k / (2.0 * phash_grid));
		return b;
	}();
	return basis;
}

} // namespace

std::array<double, 64> low_frequency_dct(std::span<const double> grid)
{
	if (grid.size() != static_cast<std::size_t>(phash_grid * phash_grid))
		throw InvalidImageError("DCT input must be a 32x32 grid");
	const auto& basis = dct_basis();

	// Columns first: partial[v][x] = sum_y basis[v][y] * grid[y][x].
	std::array<std::array<double, phash_grid>, phash_block> partial{};
	for (int v = 0; v < phash_block; ++v)
		for (int y = 0; y < phash_grid; ++y) {
			const double b = basis[v][y];
			for (int x = 0; x < phash_grid; ++x)
				partial[v][x] += b * grid[static_cast<std::size_t>(y * phash_grid + x)];
		}

	std::array<double, 64> out{};
	for (int v = 0; v < phash_block; ++v)
		for (int u = 0; u < phash_block; ++u) {
			double acc = 0.0;
			for (int x = 0; x < phash_grid; ++x)
				acc += basis[u][x] * partial[v][x];
			out[static_cast<std::size_t>(v * phash_block + u)] = std::round(acc * 1e6) / 1e6;
		}
	return out;
}

PerceptualHash binarize_coefficients(const std::array<double, 64>& coefficients)
{
	auto sorted = coefficients;
	std::sort(sorted.begin(), sorted.end());
	const double median = (sorted[31] + sorted[32]) / 2.0;
	std::uint64_t bits = 0;
	for (std::size_t i = 0; i < coefficients.size(); ++i)
		if (coefficients[i] > median)
			bits |= std::uint64_t{1} << i;
	return PerceptualHash{bits};
}

PerceptualHash compute_phash(const GrayImage& image)
{
	if (image.width < 1 || image.height < 1
	    || image.samples.size() != static_cast<std::size_t>(image.width) * static_cast<std::size_t>(image.height))
		throw InvalidImageError("gray image has zero dimension or inconsistent sample count");
	std::vector<double> src(image.samples.begin(), image.samples.end());
	const auto grid = resample_bilinear(src, image.width, image.height, phash_grid, phash_grid);
	return binarize_coefficients(low_frequency_dct(grid));
}

PerceptualHash compute_phash(const RgbImage& image)
{
	return compute_phash(to_luma(image));
}

PerceptualHash compute_phash(std::span<const std::uint8_t> encoded)
{
	return compute_phash(decode_image(encoded));
}

PerceptualHash compute_phash_file(const std::filesystem::path& path)
{
	return compute_phash(load_image(path));
}

} // namespace phreg
