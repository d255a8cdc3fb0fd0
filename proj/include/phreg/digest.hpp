#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>

namespace phreg {

using Digest = std::array<std::uint8_t, 32>;

// Lowercase hex, 64 characters.
std::string to_hex(const Digest& digest);
std::optional<Digest> digest_from_hex(std::string_view text);

// Incremental SHA-256 (OpenSSL EVP).
class Sha256
{
public:
	Sha256();
	~Sha256();
	Sha256(const Sha256&) = delete;
	Sha256& operator=(const Sha256&) = delete;

	Sha256& update(std::span<const std::uint8_t> bytes);
	Sha256& update(std::string_view bytes);
	Sha256& update(std::uint8_t byte);
	Sha256& update_be64(std::uint64_t value);
	Digest finish();

private:
	struct Context;
	std::unique_ptr<Context> m_ctx;
};

Digest sha256(std::string_view bytes);

} // namespace phreg
