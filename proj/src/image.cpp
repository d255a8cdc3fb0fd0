#include "phreg/image.hpp"

#include "phreg/error.hpp"

#include <opencv2/imgcodecs.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>

namespace phreg {

namespace {

struct Taps
{
	int first{0};
	std::vector<double> weights;
};

// Per-output-sample contributing source range and normalized weights.
std::vector<Taps> triangle_taps(int src, int out)
{
	const double scale = static_cast<double>(src) / out;
	const double support = std::max(scale, 1.0);
	std::vector<Taps> taps(static_cast<std::size_t>(out));
	for (int i = 0; i < out; ++i) {
		const double center = (i + 0.5) * scale;
		const int lo = std::max(0, static_cast<int>(std::floor(center - support)));
		const int hi = std::min(src - 1, static_cast<int>(std::ceil(center + support)));
		Taps& t = taps[static_cast<std::size_t>(i)];
		t.first = lo;
		double sum = 0.0;
		for (int x = lo; x <= hi; ++x) {
			const double w = std::max(0.0, 1.0 - std::abs((x + 0.5 - center) / support));
			t.weights.push_back(w);
			sum += w;
		}
		for (double& w : t.weights)
			w /= sum;
	}
	return taps;
}

cv::Mat to_bgr_mat(const RgbImage& image)
{
	cv::Mat mat(image.height, image.width, CV_8UC3);
	for (int y = 0; y < image.height; ++y) {
		auto* row = mat.ptr<std::uint8_t>(y);
		for (int x = 0; x < image.width; ++x) {
			const std::uint8_t* p = image.at(x, y);
			row[3 * x + 0] = p[2];
			row[3 * x + 1] = p[1];
			row[3 * x + 2] = p[0];
		}
	}
	return mat;
}

std::vector<std::uint8_t> encode(const RgbImage& image, const std::string& ext, const std::vector<int>& params)
{
	std::vector<std::uint8_t> out;
	if (!cv::imencode(ext, to_bgr_mat(image), out, params))
		throw StorageError("failed to encode image as " + ext);
	return out;
}

} // namespace

RgbImage::RgbImage(int w, int h)
	: width{w}, height{h}, pixels(static_cast<std::size_t>(w) * static_cast<std::size_t>(h) * 3, 0)
{
}

RgbImage decode_image(std::span<const std::uint8_t> encoded)
{
	if (encoded.empty())
		throw InvalidImageError("empty image buffer");
	const cv::Mat buf(1, static_cast<int>(encoded.size()), CV_8UC1, const_cast<std::uint8_t*>(encoded.data()));
	cv::Mat bgr;
	try {
		bgr = cv::imdecode(buf, cv::IMREAD_COLOR | cv::IMREAD_IGNORE_ORIENTATION);
	} catch (const cv::Exception& e) {
		throw InvalidImageError(std::string("image decode failed: ") + e.what());
	}
	if (bgr.empty() || bgr.cols < 1 || bgr.rows < 1)
		throw InvalidImageError("image could not be decoded");

	RgbImage img(bgr.cols, bgr.rows);
	for (int y = 0; y < bgr.rows; ++y) {
		const auto* row = bgr.ptr<std::uint8_t>(y);
		for (int x = 0; x < bgr.cols; ++x) {
			std::uint8_t* p = img.at(x, y);
			p[0] = row[3 * x + 2];
			p[1] = row[3 * x + 1];
			p[2] = row[3 * x + 0];
		}
	}
	return img;
}

RgbImage load_image(const std::filesystem::path& path)
{
	std::ifstream in(path, std::ios::binary);
	if (!in)
		throw InvalidImageError("cannot open image '" + path.string() + "'");
	std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
	try {
		return decode_image(bytes);
	} catch (const InvalidImageError& e) {
		throw InvalidImageError(path.string() + ": " + e.what());
	}
}

std::vector<std::uint8_t> encode_png(const RgbImage& image)
{
	return encode(image, ".png", {cv::IMWRITE_PNG_COMPRESSION, 9});
}

std::vector<std::uint8_t> encode_jpeg(const RgbImage& image, int quality)
{
	return encode(image, ".jpg", {cv::IMWRITE_JPEG_QUALITY, quality});
}

void save_image(const std::filesystem::path& path, const RgbImage& image)
{
	std::string ext = path.extension().string();
	std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
	std::vector<std::uint8_t> bytes;
	if (ext == ".png")
		bytes = encode_png(image);
	else if (ext == ".jpg" || ext == ".jpeg")
		bytes = encode_jpeg(image, 95);
	else
		throw StorageError("unsupported image extension '" + ext + "'");
	std::ofstream out(path, std::ios::binary | std::ios::trunc);
	out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
	if (!out)
		throw StorageError("failed to write '" + path.string() + "'");
}

GrayImage to_luma(const RgbImage& image)
{
	if (image.width < 1 || image.height < 1)
		throw InvalidImageError("image has zero dimension");
	GrayImage g;
	g.width = image.width;
	g.height = image.height;
	g.samples.resize(static_cast<std::size_t>(image.width) * static_cast<std::size_t>(image.height));
	for (std::size_t i = 0; i < g.samples.size(); ++i) {
		const std::uint8_t* p = &image.pixels[i * 3];
		g.samples[i] = static_cast<std::uint8_t>((299u * p[0] + 587u * p[1] + 114u * p[2] + 500u) / 1000u);
	}
	return g;
}

std::vector<double> resample_bilinear(std::span<const double> src, int src_w, int src_h, int out_w, int out_h)
{
	const auto htaps = triangle_taps(src_w, out_w);
	const auto vtaps = triangle_taps(src_h, out_h);

	std::vector<double> horiz(static_cast<std::size_t>(src_h) * static_cast<std::size_t>(out_w));
	for (int y = 0; y < src_h; ++y) {
		const double* row = src.data() + static_cast<std::size_t>(y) * src_w;
		for (int x = 0; x < out_w; ++x) {
			const Taps& t = htaps[static_cast<std::size_t>(x)];
			double acc = 0.0;
			for (std::size_t k = 0; k < t.weights.size(); ++k)
				acc += t.weights[k] * row[t.first + static_cast<int>(k)];
			horiz[static_cast<std::size_t>(y) * out_w + x] = acc;
		}
	}

	std::vector<double> out(static_cast<std::size_t>(out_w) * static_cast<std::size_t>(out_h));
	for (int y = 0; y < out_h; ++y) {
		const Taps& t = vtaps[static_cast<std::size_t>(y)];
		for (int x = 0; x < out_w; ++x) {
			double acc = 0.0;
			for (std::size_t k = 0; k < t.weights.size(); ++k)
				acc += t.weights[k] * horiz[static_cast<std::size_t>(t.first + static_cast<int>(k)) * out_w + x];
			out[static_cast<std::size_t>(y) * out_w + x] = acc;
		}
	}
	return out;
}

RgbImage resize_bilinear(const RgbImage& image, int out_w, int out_h)
{
	if (out_w < 1 || out_h < 1)
		throw InvalidImageError("resize target has zero dimension");
	RgbImage out(out_w, out_h);
	std::vector<double> plane(static_cast<std::size_t>(image.width) * static_cast<std::size_t>(image.height));
	for (int c = 0; c < 3; ++c) {
		for (std::size_t i = 0; i < plane.size(); ++i)
			plane[i] = image.pixels[i * 3 + static_cast<std::size_t>(c)];
		const auto r = resample_bilinear(plane, image.width, image.height, out_w, out_h);
		for (std::size_t i = 0; i < r.size(); ++i)
			out.pixels[i * 3 + static_cast<std::size_t>(c)] = static_cast<std::uint8_t>(std::clamp(std::lround(r[i]), 0L, 255L));
	}
	return out;
}

} // namespace phreg
