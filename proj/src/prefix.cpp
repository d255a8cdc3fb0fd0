#include "phreg/prefix.hpp"

#include "phreg/error.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cctype>
#include <cstdio>

namespace phreg {

namespace {

// 16-bit masks grouped by popcount 0..4.
const std::array<std::vector<std::uint16_t>, max_flip_tolerance + 1>& masks_by_weight()
{
	static const auto table = [] {
		std::array<std::vector<std::uint16_t>, max_flip_tolerance + 1> t;
		for (std::uint32_t m = 0; m < prefix_space; ++m) {
			const int w = std::popcount(m);
			if (w <= max_flip_tolerance)
				t[static_cast<std::size_t>(w)].push_back(static_cast<std::uint16_t>(m));
		}
		return t;
	}();
	return table;
}

} // namespace

std::string_view to_string(PrefixScheme scheme)
{
	return scheme == PrefixScheme::Continuous ? "continuous" : "discontinuous";
}

PrefixScheme parse_prefix_scheme(std::string_view text)
{
	std::string lower(text);
	std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
	if (lower == "continuous")
		return PrefixScheme::Continuous;
	if (lower == "discontinuous")
		return PrefixScheme::Discontinuous;
	throw ConfigError("unknown prefix scheme '" + std::string(text) + "'");
}

std::string PrefixKey::to_hex() const
{
	char buf[8];
	std::snprintf(buf, sizeof buf, "%04X", static_cast<unsigned>(m_value));
	return buf;
}

std::optional<PrefixKey> PrefixKey::from_hex(std::string_view text)
{
	if (text.size() != 4)
		return std::nullopt;
	unsigned v = 0;
	for (char c : text) {
		int d;
		if (c >= '0' && c <= '9')
			d = c - '0';
		else if (c >= 'A' && c <= 'F')
			d = c - 'A' + 10;
		else if (c >= 'a' && c <= 'f')
			d = c - 'a' + 10;
		else
			return std::nullopt;
		v = (v << 4) | static_cast<unsigned>(d);
	}
	return PrefixKey{static_cast<std::uint16_t>(v)};
}

PrefixKey extract_prefix(PerceptualHash hash, PrefixScheme scheme)
{
	if (scheme == PrefixScheme::Continuous)
		return PrefixKey{static_cast<std::uint16_t>(hash.bits() >> 48)};
	const unsigned v = (hash.hex_digit(4) << 12) | (hash.hex_digit(8) << 8) | (hash.hex_digit(12) << 4) | hash.hex_digit(16);
	return PrefixKey{static_cast<std::uint16_t>(v)};
}

std::size_t neighbor_count(int tolerance)
{
	if (tolerance < 0 || tolerance > max_flip_tolerance)
		throw DomainError("flip tolerance " + std::to_string(tolerance) + " outside [0, 4]");
	std::size_t total = 0;
	for (int w = 0; w <= tolerance; ++w)
		total += masks_by_weight()[static_cast<std::size_t>(w)].size();
	return total;
}

std::vector<PrefixKey> enumerate_neighbors(PrefixKey key, int flip_tolerance)
{
	std::vector<PrefixKey> out;
	out.reserve(neighbor_count(flip_tolerance));
	for (int w = 0; w <= flip_tolerance; ++w) {
		const auto group_start = out.size();
		for (std::uint16_t m : masks_by_weight()[static_cast<std::size_t>(w)])
			out.emplace_back(static_cast<std::uint16_t>(key.value() ^ m));
		std::sort(out.begin() + static_cast<std::ptrdiff_t>(group_start), out.end());
	}
	return out;
}

} // namespace phreg
