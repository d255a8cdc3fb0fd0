#include "phreg/commitment.hpp"

#include "phreg/error.hpp"

#include <algorithm>
#include <cstring>

namespace phreg {

namespace {

constexpr std::string_view bucket_tag = "phreg.bucket.v1\n";
constexpr std::string_view empty_trie_tag = "phreg.commitment.empty-trie.v1";
constexpr std::uint8_t leaf_tag = 'L';
constexpr std::uint8_t node_tag = 'N';
constexpr std::array<std::uint8_t, 4> proof_magic{'P', 'I', 'P', '1'};

const Digest absent_digest{};

Digest leaf_hash(PrefixKey prefix, const Digest& bucket)
{
	Sha256 h;
	h.update(leaf_tag);
	h.update(static_cast<std::uint8_t>(prefix.value() >> 8));
	h.update(static_cast<std::uint8_t>(prefix.value() & 0xFF));
	h.update(bucket);
	return h.finish();
}

template <typename ChildAt>
Digest node_hash(int depth, ChildAt&& child_at)
{
	Sha256 h;
	h.update(node_tag);
	h.update(static_cast<std::uint8_t>(depth));
	for (int i = 0; i < trie_arity; ++i)
		h.update(child_at(i));
	return h.finish();
}

// Index of the depth-d ancestor (d nibbles of the key).
std::size_t ancestor_index(PrefixKey prefix, int depth)
{
	return static_cast<std::size_t>(prefix.value() >> (4 * (trie_depth - depth)));
}

} // namespace

Digest bucket_digest(std::string_view canonical_serialization)
{
	return Sha256{}.update(bucket_tag).update(canonical_serialization).finish();
}

const Digest& empty_bucket_digest()
{
	static const Digest d = bucket_digest("");
	return d;
}

// ---------------------------------------------------------------------------
// Proofs

std::vector<std::uint8_t> InclusionProof::to_bytes() const
{
	std::vector<std::uint8_t> out(proof_magic.begin(), proof_magic.end());
	out.push_back(static_cast<std::uint8_t>(prefix.value() >> 8));
	out.push_back(static_cast<std::uint8_t>(prefix.value() & 0xFF));
	out.insert(out.end(), path.begin(), path.end());
	for (const auto& level : siblings)
		for (const Digest& d : level)
			out.insert(out.end(), d.begin(), d.end());
	out.insert(out.end(), leaf.begin(), leaf.end());
	out.insert(out.end(), root.begin(), root.end());
	return out;
}

std::optional<InclusionProof> InclusionProof::from_bytes(std::span<const std::uint8_t> bytes)
{
	constexpr std::size_t expected = 4 + 2 + trie_depth + trie_depth * (trie_arity - 1) * 32 + 32 + 32;
	if (bytes.size() != expected || !std::equal(proof_magic.begin(), proof_magic.end(), bytes.begin()))
		return std::nullopt;
	InclusionProof p;
	std::size_t pos = 4;
	p.prefix = PrefixKey{static_cast<std::uint16_t>((bytes[pos] << 8) | bytes[pos + 1])};
	pos += 2;
	for (auto& n : p.path)
		n = bytes[pos++];
	for (auto& level : p.siblings)
		for (Digest& d : level) {
			std::memcpy(d.data(), &bytes[pos], 32);
			pos += 32;
		}
	std::memcpy(p.leaf.data(), &bytes[pos], 32);
	pos += 32;
	std::memcpy(p.root.data(), &bytes[pos], 32);
	return p;
}

nlohmann::json to_json(const InclusionProof& proof)
{
	nlohmann::json siblings = nlohmann::json::array();
	for (const auto& level : proof.siblings) {
		nlohmann::json row = nlohmann::json::array();
		for (const Digest& d : level)
			row.push_back(to_hex(d));
		siblings.push_back(std::move(row));
	}
	return nlohmann::json{
		{"prefix", proof.prefix.to_hex()},
		{"path", std::vector<int>(proof.path.begin(), proof.path.end())},
		{"siblings", std::move(siblings)},
		{"leaf", to_hex(proof.leaf)},
		{"root", to_hex(proof.root)},
	};
}

std::optional<InclusionProof> proof_from_json(const nlohmann::json& j)
{
	try {
		InclusionProof p;
		const auto prefix = PrefixKey::from_hex(j.at("prefix").get<std::string>());
		const auto leaf = digest_from_hex(j.at("leaf").get<std::string>());
		const auto root = digest_from_hex(j.at("root").get<std::string>());
		const auto& path = j.at("path");
		const auto& siblings = j.at("siblings");
		if (!prefix || !leaf || !root || path.size() != trie_depth || siblings.size() != trie_depth)
			return std::nullopt;
		p.prefix = *prefix;
		p.leaf = *leaf;
		p.root = *root;
		for (int d = 0; d < trie_depth; ++d) {
			const int n = path.at(d).get<int>();
			if (n < 0 || n >= trie_arity)
				return std::nullopt;
			p.path[static_cast<std::size_t>(d)] = static_cast<std::uint8_t>(n);
			const auto& row = siblings.at(d);
			if (row.size() != trie_arity - 1)
				return std::nullopt;
			for (int i = 0; i < trie_arity - 1; ++i) {
				const auto dg = digest_from_hex(row.at(i).get<std::string>());
				if (!dg)
					return std::nullopt;
				p.siblings[static_cast<std::size_t>(d)][static_cast<std::size_t>(i)] = *dg;
			}
		}
		return p;
	} catch (const nlohmann::json::exception&) {
		return std::nullopt;
	}
}

bool verify_inclusion(const InclusionProof& proof, const Digest& root)
{
	if (proof.root != root)
		return false;
	for (int d = 0; d < trie_depth; ++d)
		if (proof.path[static_cast<std::size_t>(d)] != proof.prefix.nibble(d + 1))
			return false;

	Digest current = leaf_hash(proof.prefix, proof.leaf);
	for (int depth = trie_depth - 1; depth >= 0; --depth) {
		const auto slot = static_cast<int>(proof.path[static_cast<std::size_t>(depth)]);
		const auto& level = proof.siblings[static_cast<std::size_t>(depth)];
		current = node_hash(depth, [&](int i) -> const Digest& {
			if (i == slot)
				return current;
			return level[static_cast<std::size_t>(i < slot ? i : i - 1)];
		});
	}
	return current == root;
}

// ---------------------------------------------------------------------------
// Trie

CommitmentTrie::CommitmentTrie()
	: m_bucket_digest(prefix_space), m_leaf(prefix_space), m_present(prefix_space, false), m_version(prefix_space, 0), m_root{empty_root()}
{
	for (int d = 1; d < trie_depth; ++d) {
		const std::size_t n = std::size_t{1} << (4 * d);
		m_internal[static_cast<std::size_t>(d)].assign(n, absent_digest);
		m_population[static_cast<std::size_t>(d)].assign(n, 0);
	}
}

const Digest& CommitmentTrie::empty_root()
{
	static const Digest d = sha256(empty_trie_tag);
	return d;
}

std::optional<Digest> CommitmentTrie::leaf(PrefixKey prefix) const
{
	if (!contains(prefix))
		return std::nullopt;
	return m_bucket_digest[prefix.value()];
}

// Digest of node `child` at `depth` as its parent hashes it.
const Digest& CommitmentTrie::child_of(int depth, std::size_t child) const
{
	if (depth == trie_depth)
		return m_present[child] ? m_leaf[child] : absent_digest;
	const auto d = static_cast<std::size_t>(depth);
	return m_population[d][child] ? m_internal[d][child] : absent_digest;
}

std::uint64_t CommitmentTrie::update(PrefixKey prefix, const Digest& bucket_digest)
{
	set_leaf(prefix, bucket_digest, m_version[prefix.value()] + 1);
	return m_version[prefix.value()];
}

void CommitmentTrie::set_leaf(PrefixKey prefix, const Digest& bucket_digest, std::uint64_t version)
{
	const auto key = prefix.value();
	if (!m_present[key]) {
		m_present[key] = true;
		++m_leaf_count;
		for (int d = 1; d < trie_depth; ++d)
			++m_population[static_cast<std::size_t>(d)][ancestor_index(prefix, d)];
	}
	m_bucket_digest[key] = bucket_digest;
	m_leaf[key] = leaf_hash(prefix, bucket_digest);
	m_version[key] = version;
	recompute_path(prefix);
}

void CommitmentTrie::recompute_path(PrefixKey prefix)
{
	for (int depth = trie_depth - 1; depth >= 0; --depth) {
		const std::size_t node = ancestor_index(prefix, depth);
		const std::size_t first_child = node << 4;
		Digest digest = node_hash(depth, [&](int i) -> const Digest& {
			return child_of(depth + 1, first_child + static_cast<std::size_t>(i));
		});
		if (depth == 0)
			m_root = digest;
		else
			m_internal[static_cast<std::size_t>(depth)][node] = digest;
	}
}

InclusionProof CommitmentTrie::prove(PrefixKey prefix) const
{
	if (!contains(prefix))
		throw NotFoundError("no bucket commitment for prefix " + prefix.to_hex());
	InclusionProof p;
	p.prefix = prefix;
	p.root = m_root;
	p.leaf = m_bucket_digest[prefix.value()];
	for (int depth = 0; depth < trie_depth; ++depth) {
		const auto slot = static_cast<std::size_t>(prefix.nibble(depth + 1));
		p.path[static_cast<std::size_t>(depth)] = static_cast<std::uint8_t>(slot);
		const std::size_t first_child = ancestor_index(prefix, depth) << 4;
		std::size_t out = 0;
		for (std::size_t i = 0; i < trie_arity; ++i) {
			if (i == slot)
				continue;
			p.siblings[static_cast<std::size_t>(depth)][out++] = child_of(depth + 1, first_child + i);
		}
	}
	return p;
}

std::vector<std::pair<PrefixKey, Digest>> CommitmentTrie::leaves() const
{
	std::vector<std::pair<PrefixKey, Digest>> out;
	out.reserve(m_leaf_count);
	for (std::size_t k = 0; k < prefix_space; ++k)
		if (m_present[k])
			out.emplace_back(PrefixKey{static_cast<std::uint16_t>(k)}, m_bucket_digest[k]);
	return out;
}

} // namespace phreg
