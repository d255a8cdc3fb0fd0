#include "phreg/hash.hpp"

#include "phreg/error.hpp"

#include <cstdio>

namespace phreg {

namespace {

int hex_value(char c)
{
	if (c >= '0' && c <= '9')
		return c - '0';
	if (c >= 'A' && c <= 'F')
		return c - 'A' + 10;
	if (c >= 'a' && c <= 'f')
		return c - 'a' + 10;
	return -1;
}

} // namespace

std::string PerceptualHash::to_hex() const
{
	static constexpr char digits[] = "0123456789ABCDEF";
	std::string out(16, '0');
	for (int i = 0; i < 16; ++i)
		out[static_cast<std::size_t>(i)] = digits[hex_digit(i + 1)];
	return out;
}

std::optional<PerceptualHash> PerceptualHash::from_hex(std::string_view text)
{
	if (text.size() != 16)
		return std::nullopt;
	std::uint64_t v = 0;
	for (char c : text) {
		int d = hex_value(c);
		if (d < 0)
			return std::nullopt;
		v = (v << 4) | static_cast<std::uint64_t>(d);
	}
	return PerceptualHash{v};
}

PerceptualHash PerceptualHash::parse(std::string_view text)
{
	auto h = from_hex(text);
	if (!h)
		throw InvalidInputError("malformed hash '" + std::string(text) + "': expected 16 hex digits");
	return *h;
}

std::string SimilarityScore::to_string() const
{
	char buf[16];
	std::snprintf(buf, sizeof buf, "%d.%02d", m_hundredths / 100, m_hundredths % 100);
	return buf;
}

SimilarityScore similarity_score(int distance)
{
	if (distance < 0 || distance > hash_bits)
		throw DomainError("hamming distance " + std::to_string(distance) + " outside [0, 64]");
	// (1 - d/64) * 100 in units of 1e-4 is exactly 1'000'000 - 15'625 d.
	const int ten_thousandths = 1'000'000 - 15'625 * distance;
	return SimilarityScore::from_hundredths((ten_thousandths + 50) / 100);
}

} // namespace phreg
