#pragma once

#include "phreg/hash.hpp"

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace phreg {

// Continuous: hex digits 1-4 of the MSB-first rendering.
// Discontinuous: hex digits 4, 8, 12, 16 (1-indexed), concatenated in order.
enum class PrefixScheme { Continuous, Discontinuous };

std::string_view to_string(PrefixScheme scheme);
// Accepts "continuous" / "discontinuous" (case-insensitive). Throws ConfigError.
PrefixScheme parse_prefix_scheme(std::string_view text);

inline constexpr int prefix_bits = 16;
inline constexpr std::size_t prefix_space = std::size_t{1} << prefix_bits;
inline constexpr int max_flip_tolerance = 4;

class PrefixKey
{
public:
	constexpr PrefixKey() = default;
	constexpr explicit PrefixKey(std::uint16_t value) : m_value{value} {}

	constexpr std::uint16_t value() const { return m_value; }
	// 1-indexed hex digit of the 4-digit rendering.
	constexpr unsigned nibble(int position) const { return (m_value >> (4 * (4 - position))) & 0xFu; }

	std::string to_hex() const;
	static std::optional<PrefixKey> from_hex(std::string_view text);

	friend constexpr auto operator<=>(const PrefixKey&, const PrefixKey&) = default;

private:
	std::uint16_t m_value{0};
};

PrefixKey extract_prefix(PerceptualHash hash, PrefixScheme scheme);

// Number of keys within Hamming distance `tolerance` of a 16-bit key:
// sum_{i=0..t} C(16, i).
std::size_t neighbor_count(int tolerance);

// All keys within `flip_tolerance` bits of `key`: the key itself first, then
// ascending by (distance, value). Throws DomainError outside [0, 4].
std::vector<PrefixKey> enumerate_neighbors(PrefixKey key, int flip_tolerance);

} // namespace phreg
