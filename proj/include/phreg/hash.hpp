#pragma once

#include <bit>
#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace phreg {

inline constexpr int hash_bits = 64;

// 64-bit perceptual fingerprint.
//
// Bit i (value >> i & 1) holds the binarized DCT coefficient i of the 8x8
// low-frequency block, coefficients numbered row-major (i = row * 8 + col).
// The canonical text form is 16 uppercase hex digits, most significant
// nibble first, so hex digit 1 covers bits 63..60.
class PerceptualHash
{
public:
	constexpr PerceptualHash() = default;
	constexpr explicit PerceptualHash(std::uint64_t bits) : m_bits{bits} {}

	constexpr std::uint64_t bits() const { return m_bits; }

	// 1-indexed hex digit, MSB first (digit 1 is the leading character).
	constexpr unsigned hex_digit(int position) const
	{
		return static_cast<unsigned>((m_bits >> (4 * (16 - position))) & 0xF);
	}

	std::string to_hex() const;

	// Accepts exactly 16 hex digits (either case). Returns nullopt otherwise.
	static std::optional<PerceptualHash> from_hex(std::string_view text);

	// Throws InvalidInputError on malformed text.
	static PerceptualHash parse(std::string_view text);

	friend constexpr auto operator<=>(const PerceptualHash&, const PerceptualHash&) = default;

private:
	std::uint64_t m_bits{};
};

constexpr int hamming_distance(PerceptualHash a, PerceptualHash b)
{
	return std::popcount(a.bits() ^ b.bits());
}

// Similarity percentage (1 - d/64) * 100, held exactly in hundredths.
class SimilarityScore
{
public:
	constexpr SimilarityScore() = default;

	static constexpr SimilarityScore from_hundredths(int v)
	{
		SimilarityScore s;
		s.m_hundredths = v;
		return s;
	}

	constexpr int hundredths() const { return m_hundredths; }
	double percent() const { return m_hundredths / 100.0; }

	// Always two decimals, e.g. "96.88".
	std::string to_string() const;

	friend constexpr auto operator<=>(const SimilarityScore&, const SimilarityScore&) = default;

private:
	int m_hundredths{0};
};

// Throws DomainError unless 0 <= distance <= 64. Rounds half up.
SimilarityScore similarity_score(int distance);

} // namespace phreg
