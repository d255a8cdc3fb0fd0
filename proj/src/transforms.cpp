#include "phreg/transforms.hpp"

#include "phreg/error.hpp"

#include <opencv2/core.hpp>
#include <opencv2/imgproc.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <numeric>

namespace phreg {

namespace {

struct Range
{
	double lo;
	double hi;
	bool lo_open;
};

Range magnitude_range(TransformKind kind)
{
	switch (kind) {
	case TransformKind::Blur:
		return {0, 20, false};
	case TransformKind::Sharpen:
		return {0, 10, false};
	case TransformKind::EdgeEnhance:
		return {0, 1, false};
	case TransformKind::Brightness:
	case TransformKind::Contrast:
		return {-1, 10, false};
	case TransformKind::ColorShift:
	case TransformKind::Noise:
		return {0, 255, false};
	case TransformKind::TextOverlay:
		return {0, 10, true};
	}
	return {0, 0, false};
}

// Views the interleaved buffer in place; channel order is irrelevant to
// every operation below.
cv::Mat as_mat(RgbImage& image)
{
	return cv::Mat(image.height, image.width, CV_8UC3, image.pixels.data());
}

cv::Mat to_float(const RgbImage& image)
{
	cv::Mat src(image.height, image.width, CV_8UC3, const_cast<std::uint8_t*>(image.pixels.data()));
	cv::Mat f;
	src.convertTo(f, CV_32FC3);
	return f;
}

RgbImage from_float(const cv::Mat& f, int w, int h)
{
	RgbImage out(w, h);
	cv::Mat dst = as_mat(out);
	f.convertTo(dst, CV_8UC3); // saturating, round-to-nearest
	return out;
}

cv::Mat gaussian(const cv::Mat& f, double sigma)
{
	cv::Mat out;
	cv::GaussianBlur(f, out, cv::Size(0, 0), sigma, sigma, cv::BORDER_REFLECT_101);
	return out;
}

double mean_luma(const RgbImage& image)
{
	const GrayImage g = to_luma(image);
	const double sum = std::accumulate(g.samples.begin(), g.samples.end(), 0.0);
	return sum / static_cast<double>(g.samples.size());
}

RgbImage text_overlay(const RgbImage& image, double scale, std::uint64_t seed)
{
	static constexpr std::array<const char*, 6> words{"SAMPLE", "(c) 2024", "@user", "PROMO", "#viral", "DRAFT"};
	std::mt19937_64 rng(seed);
	const char* text = words[rng() % words.size()];
	const int font = cv::FONT_HERSHEY_SIMPLEX;
	const int thickness = std::max(1, static_cast<int>(std::lround(scale)));
	int baseline = 0;
	const cv::Size size = cv::getTextSize(text, font, scale, thickness, &baseline);
	const int max_x = std::max(0, image.width - size.width);
	const int max_y = std::max(0, image.height - size.height - baseline);
	const int x = max_x ? static_cast<int>(rng() % static_cast<std::uint64_t>(max_x + 1)) : 0;
	const int y = size.height + (max_y ? static_cast<int>(rng() % static_cast<std::uint64_t>(max_y + 1)) : 0);
	const bool light = rng() & 1u;

	RgbImage out = image;
	cv::Mat m = as_mat(out);
	const cv::Scalar ink = light ? cv::Scalar(255, 255, 255) : cv::Scalar(0, 0, 0);
	cv::putText(m, text, cv::Point(x, y), font, scale, ink, thickness, cv::LINE_AA);
	return out;
}

} // namespace

std::string_view to_string(TransformKind kind)
{
	switch (kind) {
	case TransformKind::Blur:
		return "blur";
	case TransformKind::Sharpen:
		return "sharpen";
	case TransformKind::EdgeEnhance:
		return "edge_enhance";
	case TransformKind::Brightness:
		return "brightness";
	case TransformKind::Contrast:
		return "contrast";
	case TransformKind::ColorShift:
		return "color_shift";
	case TransformKind::TextOverlay:
		return "text_overlay";
	case TransformKind::Noise:
		return "noise";
	}
	return "?";
}

std::optional<TransformKind> parse_transform_kind(std::string_view text)
{
	for (TransformKind k : all_transform_kinds)
		if (to_string(k) == text)
			return k;
	return std::nullopt;
}

std::string to_string(const TransformSpec& spec)
{
	char buf[96];
	std::snprintf(buf, sizeof buf, "%s(%g,seed=%llu)", std::string(to_string(spec.kind)).c_str(), spec.magnitude,
	              static_cast<unsigned long long>(spec.seed));
	return buf;
}

double default_magnitude(TransformKind kind)
{
	switch (kind) {
	case TransformKind::Blur:
		return 1.5;
	case TransformKind::Sharpen:
		return 1.0;
	case TransformKind::EdgeEnhance:
		return 0.5;
	case TransformKind::Brightness:
		return 0.25;
	case TransformKind::Contrast:
		return 0.3;
	case TransformKind::ColorShift:
		return 25;
	case TransformKind::TextOverlay:
		return 0.5;
	case TransformKind::Noise:
		return 10;
	}
	return 0;
}

RgbImage apply_transform(const RgbImage& image, const TransformSpec& spec)
{
	if (image.width <= 0 || image.height <= 0
	    || image.pixels.size() != static_cast<std::size_t>(image.width) * image.height * 3)
		throw InvalidImageError("transform input is empty or malformed");
	const Range r = magnitude_range(spec.kind);
	const double m = spec.magnitude;
	if (!std::isfinite(m) || m > r.hi || m < r.lo || (r.lo_open && m == r.lo))
		throw ConfigError("magnitude " + std::to_string(m) + " out of range for " + std::string(to_string(spec.kind)));

	const int w = image.width;
	const int h = image.height;
	switch (spec.kind) {
	case TransformKind::Blur:
		if (m == 0)
			return image;
		return from_float(gaussian(to_float(image), m), w, h);

	case TransformKind::Sharpen: {
		if (m == 0)
			return image;
		const cv::Mat f = to_float(image);
		const cv::Mat blurred = gaussian(f, 1.0);
		return from_float(f + m * (f - blurred), w, h);
	}

	case TransformKind::EdgeEnhance: {
		if (m == 0)
			return image;
		const cv::Mat f = to_float(image);
		// 3x3 kernel: centre 10, ring -1, divided by 2.
		cv::Mat kernel(3, 3, CV_32F, cv::Scalar(-0.5f));
		kernel.at<float>(1, 1) = 5.0f;
		cv::Mat enhanced;
		cv::filter2D(f, enhanced, -1, kernel, cv::Point(-1, -1), 0, cv::BORDER_REPLICATE);
		return from_float((1.0 - m) * f + m * enhanced, w, h);
	}

	case TransformKind::Brightness: {
		if (m == 0)
			return image;
		return from_float(to_float(image) * (1.0 + m), w, h);
	}

	case TransformKind::Contrast: {
		if (m == 0)
			return image;
		const double mean = mean_luma(image);
		const cv::Mat f = to_float(image);
		return from_float((f - cv::Scalar::all(mean)) * (1.0 + m) + cv::Scalar::all(mean), w, h);
	}

	case TransformKind::ColorShift: {
		if (m == 0)
			return image;
		std::mt19937_64 rng(spec.seed);
		cv::Scalar shift;
		for (int c = 0; c < 3; ++c)
			shift[c] = (rng() & 1u) ? m : -m;
		return from_float(to_float(image) + shift, w, h);
	}

	case TransformKind::TextOverlay:
		return text_overlay(image, m, spec.seed);

	case TransformKind::Noise: {
		if (m == 0)
			return image;
		std::mt19937_64 rng(spec.seed);
		std::normal_distribution<double> noise(0.0, m);
		RgbImage out = image;
		for (std::uint8_t& p : out.pixels)
			p = static_cast<std::uint8_t>(std::clamp(std::lround(p + noise(rng)), 0L, 255L));
		return out;
	}
	}
	return image;
}

std::vector<TransformSpec> random_edit_chain(std::mt19937_64& rng)
{
	std::vector<TransformKind> kinds(std::begin(all_transform_kinds), std::end(all_transform_kinds));
	std::shuffle(kinds.begin(), kinds.end(), rng);
	const std::size_t count = 1 + rng() % 3;
	std::vector<TransformSpec> chain;
	for (std::size_t i = 0; i < count; ++i)
		chain.push_back(TransformSpec{kinds[i], default_magnitude(kinds[i]), rng()});
	return chain;
}

RgbImage apply_chain(const RgbImage& image, const std::vector<TransformSpec>& chain)
{
	RgbImage out = image;
	for (const TransformSpec& s : chain)
		out = apply_transform(out, s);
	return out;
}

} // namespace phreg
