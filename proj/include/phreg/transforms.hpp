#pragma once

#include "phreg/image.hpp"

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace phreg {

enum class TransformKind { Blur, Sharpen, EdgeEnhance, Brightness, Contrast, ColorShift, TextOverlay, Noise };

inline constexpr TransformKind all_transform_kinds[] = {
	TransformKind::Blur,     TransformKind::Sharpen,    TransformKind::EdgeEnhance, TransformKind::Brightness,
	TransformKind::Contrast, TransformKind::ColorShift, TransformKind::TextOverlay, TransformKind::Noise,
};

std::string_view to_string(TransformKind kind);
std::optional<TransformKind> parse_transform_kind(std::string_view text);

// Magnitude meaning per kind (0 is the identity for every kind except
// TextOverlay, which needs a positive glyph scale):
//   Blur         Gaussian sigma in pixels, [0, 20]
//   Sharpen      unsharp-mask amount, [0, 10]
//   EdgeEnhance  blend weight of the edge-enhance kernel, [0, 1]
//   Brightness   factor 1 + m, m in [-1, 10]
//   Contrast     factor 1 + m around the mean luma, m in [-1, 10]
//   ColorShift   per-channel offset in levels, [0, 255]; seed picks signs
//   TextOverlay  glyph scale, (0, 10]; seed picks text and position
//   Noise        Gaussian sigma in levels, [0, 255]; seeded
struct TransformSpec
{
	TransformKind kind{TransformKind::Blur};
	double magnitude{0.0};
	std::uint64_t seed{0};

	bool operator==(const TransformSpec&) const = default;
};

std::string to_string(const TransformSpec& spec);

// Throws ConfigError when the magnitude is outside its range, or
// InvalidImageError for an empty image. Output has the input's dimensions.
RgbImage apply_transform(const RgbImage& image, const TransformSpec& spec);

// Moderate default magnitude for edited-set generation.
double default_magnitude(TransformKind kind);

// 1-3 distinct kinds at their default magnitudes, each with a fresh seed.
std::vector<TransformSpec> random_edit_chain(std::mt19937_64& rng);

RgbImage apply_chain(const RgbImage& image, const std::vector<TransformSpec>& chain);

} // namespace phreg
