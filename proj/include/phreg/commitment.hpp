#pragma once

#include "phreg/digest.hpp"
#include "phreg/prefix.hpp"
#include "phreg/timeutil.hpp"

#include "json.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace phreg {

class Ledger;
struct LedgerRecord;

// SHA-256 over a domain tag and the bucket's canonical serialization.
Digest bucket_digest(std::string_view canonical_serialization);
const Digest& empty_bucket_digest();

inline constexpr int trie_depth = 4;
inline constexpr int trie_arity = 16;

// Authenticated path from one bucket leaf to the root.
//
// siblings[level] holds the 15 digests next to the path at that depth
// (level 0 is the root's children), in nibble order with the path's own
// slot omitted. Absent subtrees appear as the all-zero digest.
struct InclusionProof
{
	PrefixKey prefix;
	std::array<std::uint8_t, trie_depth> path{};
	std::array<std::array<Digest, trie_arity - 1>, trie_depth> siblings{};
	Digest leaf{};
	Digest root{};

	bool operator==(const InclusionProof&) const = default;

	// Fixed-size binary form: "PIP1" | prefix(2) | path(4) | siblings | leaf | root.
	std::vector<std::uint8_t> to_bytes() const;
	static std::optional<InclusionProof> from_bytes(std::span<const std::uint8_t> bytes);
};

// {"prefix": "A1F3", "path": [10,1,15,3], "siblings": [[hex x15] x4],
//  "leaf": hex, "root": hex}
nlohmann::json to_json(const InclusionProof& proof);
// nullopt when the object is malformed.
std::optional<InclusionProof> proof_from_json(const nlohmann::json& j);

// True iff the proof's claimed root equals `root` and recomputing the path
// from the leaf digest reproduces it. Malformed proofs yield false.
bool verify_inclusion(const InclusionProof& proof, const Digest& root);

// Sixteen-way, fixed-depth trie keyed by the four nibbles of a PrefixKey.
// Leaves hold bucket digests; an internal node's digest covers its depth
// and all sixteen child digests, so any leaf change moves the root.
class CommitmentTrie
{
public:
	CommitmentTrie();

	// Root of a trie with no leaves: SHA-256 of a fixed domain constant.
	static const Digest& empty_root();

	const Digest& root() const { return m_root; }
	bool contains(PrefixKey prefix) const { return m_present[prefix.value()]; }
	std::optional<Digest> leaf(PrefixKey prefix) const;
	std::uint64_t version(PrefixKey prefix) const { return m_version[prefix.value()]; }
	std::size_t leaf_count() const { return m_leaf_count; }

	// Sets the leaf, bumps its version by one and returns the new version.
	std::uint64_t update(PrefixKey prefix, const Digest& bucket_digest);
	// Restore path: set leaf and version verbatim.
	void set_leaf(PrefixKey prefix, const Digest& bucket_digest, std::uint64_t version);

	// Throws NotFoundError when the prefix has no leaf.
	InclusionProof prove(PrefixKey prefix) const;

	std::vector<std::pair<PrefixKey, Digest>> leaves() const;

private:
	void recompute_path(PrefixKey prefix);
	const Digest& child_of(int depth, std::size_t child) const;

	std::vector<Digest> m_bucket_digest;
	// Hashed leaf nodes (prefix-bound), as the depth-3 parents see them.
	std::vector<Digest> m_leaf;
	std::vector<bool> m_present;
	std::vector<std::uint64_t> m_version;
	// m_internal[d] has 16^d nodes (d = 1..3); depth 0 is m_root.
	std::array<std::vector<Digest>, trie_depth> m_internal;
	std::array<std::vector<std::uint32_t>, trie_depth> m_population;
	Digest m_root;
	std::size_t m_leaf_count{0};
};

// Append-only chain of root commitments, standing in for the on-chain
// anchor. Each record's digest covers its predecessor's digest.
struct LedgerRecord
{
	std::uint64_t sequence{0};
	Timestamp timestamp{};
	PrefixKey prefix;
	std::uint64_t version{0};
	Digest root{};
	Digest record_digest{};

	bool operator==(const LedgerRecord&) const = default;
};

class Ledger
{
public:
	const LedgerRecord& append(Timestamp when, PrefixKey prefix, std::uint64_t version, const Digest& root);

	std::size_t size() const { return m_records.size(); }
	// Ensures the next append cannot fail on allocation.
	void reserve_one_more()
	{
		if (m_records.size() == m_records.capacity())
			m_records.reserve(m_records.size() < 16 ? 16 : m_records.size() * 2);
	}
	bool empty() const { return m_records.empty(); }
	const std::vector<LedgerRecord>& records() const { return m_records; }
	const LedgerRecord& back() const { return m_records.back(); }
	// Chain head: last record digest, or all-zero before the first record.
	Digest head() const;

	// Recomputes every record digest and checks contiguous sequence numbers.
	bool verify_chain() const;

	// "<seq> <ISO-8601> <PREFIX> <version> <root-hex> <record-hex>"
	static std::string format_record(const LedgerRecord& record);
	// Throws IntegrityError on malformed lines.
	static LedgerRecord parse_record(std::string_view line);

	// Parses a ledger file image. A final line lacking its newline is a torn
	// write and is dropped; any other defect throws IntegrityError.
	static Ledger parse(std::string_view text);

	static Digest chain_digest(const Digest& previous, std::uint64_t sequence, Timestamp when, PrefixKey prefix,
	                           std::uint64_t version, const Digest& root);

private:
	std::vector<LedgerRecord> m_records;
};

// Moves the trie leaf for `prefix` to `bucket_digest` and logs the new root.
const LedgerRecord& update_commitment(CommitmentTrie& trie, Ledger& ledger, PrefixKey prefix,
                                      const Digest& bucket_digest, Timestamp when);

} // namespace phreg
