// Generates the committed image corpus: procedural scenes (gradient
// background plus filled shapes) as originals, and for each original a
// perturbed sibling scene as a negative. Siblings share layout with their
// original to a random degree, so their hash distances spread from near
// to far.
//
//   make_corpus <out-dir> [count=120] [seed=7]

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

namespace {

constexpr int side = 128;

struct Shape
{
	int type; // 0 circle, 1 rectangle, 2 ellipse, 3 triangle
	cv::Point2d center;
	double size;
	double angle;
	cv::Scalar color;
};

struct Scene
{
	cv::Scalar c0, c1;
	double bg_angle;
	std::vector<Shape> shapes;
};

using Rng = std::mt19937_64;

double uniform(Rng& rng, double lo, double hi)
{
	return std::uniform_real_distribution<double>(lo, hi)(rng);
}

cv::Scalar random_color(Rng& rng)
{
	return cv::Scalar(uniform(rng, 0, 255), uniform(rng, 0, 255), uniform(rng, 0, 255));
}

Shape random_shape(Rng& rng)
{
	return Shape{static_cast<int>(rng() % 4), {uniform(rng, 10, side - 10), uniform(rng, 10, side - 10)},
	             uniform(rng, 10, 45), uniform(rng, 0, 180), random_color(rng)};
}

Scene random_scene(Rng& rng)
{
	Scene s{random_color(rng), random_color(rng), uniform(rng, 0, 2 * CV_PI), {}};
	const int n = 2 + static_cast<int>(rng() % 5);
	for (int i = 0; i < n; ++i)
		s.shapes.push_back(random_shape(rng));
	return s;
}

cv::Scalar jitter(const cv::Scalar& c, double amount, Rng& rng)
{
	cv::Scalar out;
	for (int i = 0; i < 3; ++i)
		out[i] = std::clamp(c[i] + uniform(rng, -amount, amount), 0.0, 255.0);
	return out;
}

// p in [0, 1]: 0 leaves the scene alone, 1 rearranges nearly everything.
Scene perturb(const Scene& base, double p, Rng& rng)
{
	Scene s = base;
	s.bg_angle += uniform(rng, -p, p) * CV_PI / 2;
	s.c0 = jitter(s.c0, 80 * p, rng);
	s.c1 = jitter(s.c1, 80 * p, rng);
	for (Shape& sh : s.shapes) {
		if (uniform(rng, 0, 1) < p / 2) {
			sh = random_shape(rng);
			continue;
		}
		sh.center.x = std::clamp(sh.center.x + uniform(rng, -30, 30) * p, 0.0, double(side));
		sh.center.y = std::clamp(sh.center.y + uniform(rng, -30, 30) * p, 0.0, double(side));
		sh.size *= 1 + uniform(rng, -0.5, 0.5) * p;
		sh.angle += uniform(rng, -60, 60) * p;
		sh.color = jitter(sh.color, 120 * p, rng);
	}
	if (uniform(rng, 0, 1) < p)
		s.shapes.push_back(random_shape(rng));
	return s;
}

cv::Mat render(const Scene& s)
{
	cv::Mat img(side, side, CV_8UC3);
	const double dx = std::cos(s.bg_angle), dy = std::sin(s.bg_angle);
	for (int y = 0; y < side; ++y)
		for (int x = 0; x < side; ++x) {
			const double t = std::clamp(0.5 + ((x - side / 2.0) * dx + (y - side / 2.0) * dy) / side, 0.0, 1.0);
			const cv::Scalar c = s.c0 * (1 - t) + s.c1 * t;
			img.at<cv::Vec3b>(y, x) = cv::Vec3b(cv::saturate_cast<uchar>(c[0]), cv::saturate_cast<uchar>(c[1]),
			                                    cv::saturate_cast<uchar>(c[2]));
		}
	for (const Shape& sh : s.shapes) {
		const cv::Point c(static_cast<int>(sh.center.x), static_cast<int>(sh.center.y));
		const int r = static_cast<int>(sh.size);
		switch (sh.type) {
		case 0:
			cv::circle(img, c, r, sh.color, cv::FILLED, cv::LINE_AA);
			break;
		case 1:
			cv::rectangle(img, c - cv::Point(r, r / 2), c + cv::Point(r, r / 2), sh.color, cv::FILLED, cv::LINE_AA);
			break;
		case 2:
			cv::ellipse(img, c, cv::Size(r, r / 2), sh.angle, 0, 360, sh.color, cv::FILLED, cv::LINE_AA);
			break;
		default: {
			std::vector<cv::Point> pts;
			for (int k = 0; k < 3; ++k) {
				const double a = (sh.angle + 120.0 * k) * CV_PI / 180;
				pts.emplace_back(c.x + static_cast<int>(r * std::cos(a)), c.y + static_cast<int>(r * std::sin(a)));
			}
			cv::fillConvexPoly(img, pts, sh.color, cv::LINE_AA);
		}
		}
	}
	cv::GaussianBlur(img, img, cv::Size(0, 0), 1.0);
	return img;
}

} // namespace

int main(int argc, char** argv)
{
	if (argc < 2) {
		std::fprintf(stderr, "usage: make_corpus <out-dir> [count=120] [seed=7]\n");
		return 2;
	}
	const std::filesystem::path out = argv[1];
	const int count = argc > 2 ? std::stoi(argv[2]) : 120;
	const std::uint64_t seed = argc > 3 ? std::stoull(argv[3]) : 7;

	std::filesystem::create_directories(out / "originals");
	std::filesystem::create_directories(out / "negatives");
	Rng rng(seed);
	for (int i = 0; i < count; ++i) {
		const Scene scene = random_scene(rng);
		// Perturbation degree spread over [0.15, 1] so sibling distances vary.
		const double p = 0.15 + 0.85 * (i % 20) / 19.0;
		const Scene sibling = perturb(scene, p, rng);
		char name[32];
		std::snprintf(name, sizeof name, "%03d.png", i);
		if (!cv::imwrite((out / "originals" / name).string(), render(scene))
		    || !cv::imwrite((out / "negatives" / name).string(), render(sibling))) {
			std::fprintf(stderr, "make_corpus: write failed\n");
			return 1;
		}
	}
	std::printf("wrote %d originals and %d negatives to %s\n", count, count, out.string().c_str());
	return 0;
}
