#include "phreg/digest.hpp"

#include "phreg/error.hpp"

#include <openssl/evp.h>

namespace phreg {

struct Sha256::Context
{
	EVP_MD_CTX* md{EVP_MD_CTX_new()};
	~Context() { EVP_MD_CTX_free(md); }
};

Sha256::Sha256() : m_ctx{std::make_unique<Context>()}
{
	if (!m_ctx->md || EVP_DigestInit_ex(m_ctx->md, EVP_sha256(), nullptr) != 1)
		throw Error("SHA-256 initialisation failed");
}

Sha256::~Sha256() = default;

Sha256& Sha256::update(std::span<const std::uint8_t> bytes)
{
	EVP_DigestUpdate(m_ctx->md, bytes.data(), bytes.size());
	return *this;
}

Sha256& Sha256::update(std::string_view bytes)
{
	EVP_DigestUpdate(m_ctx->md, bytes.data(), bytes.size());
	return *this;
}

Sha256& Sha256::update(std::uint8_t byte)
{
	EVP_DigestUpdate(m_ctx->md, &byte, 1);
	return *this;
}

Sha256& Sha256::update_be64(std::uint64_t value)
{
	std::uint8_t buf[8];
	for (int i = 0; i < 8; ++i)
		buf[i] = static_cast<std::uint8_t>(value >> (56 - 8 * i));
	EVP_DigestUpdate(m_ctx->md, buf, sizeof buf);
	return *this;
}

Digest Sha256::finish()
{
	Digest out{};
	unsigned len = 0;
	EVP_DigestFinal_ex(m_ctx->md, out.data(), &len);
	EVP_DigestInit_ex(m_ctx->md, EVP_sha256(), nullptr);
	return out;
}

Digest sha256(std::string_view bytes)
{
	return Sha256{}.update(bytes).finish();
}

std::string to_hex(const Digest& digest)
{
	static constexpr char digits[] = "0123456789abcdef";
	std::string out(64, '0');
	for (std::size_t i = 0; i < digest.size(); ++i) {
		out[2 * i] = digits[digest[i] >> 4];
		out[2 * i + 1] = digits[digest[i] & 0xF];
	}
	return out;
}

std::optional<Digest> digest_from_hex(std::string_view text)
{
	if (text.size() != 64)
		return std::nullopt;
	auto nib = [](char c) -> int {
		if (c >= '0' && c <= '9')
			return c - '0';
		if (c >= 'a' && c <= 'f')
			return c - 'a' + 10;
		return -1;
	};
	Digest out{};
	for (std::size_t i = 0; i < out.size(); ++i) {
		const int hi = nib(text[2 * i]);
		const int lo = nib(text[2 * i + 1]);
		if (hi < 0 || lo < 0)
			return std::nullopt;
		out[i] = static_cast<std::uint8_t>((hi << 4) | lo);
	}
	return out;
}

} // namespace phreg
