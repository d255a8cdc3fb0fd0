#pragma once

#include "phreg/hash.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace phreg {

using EntryId = std::uint64_t;

struct BkMatch
{
	PerceptualHash hash;
	EntryId payload{0};
	int distance{0};

	bool operator==(const BkMatch&) const = default;
};

struct SearchStats
{
	std::size_t nodes_visited{0};
};

// Burkhard-Keller tree over 64-bit hashes under Hamming distance.
//
// Nodes live in a contiguous arena; node 0 is the root. Each node keeps its
// children sorted by edge distance, and a repeated hash appends its payload
// to the existing node (payloads kept ascending). Append-only: there is no
// removal.
class BkTree
{
public:
	struct Edge
	{
		std::uint8_t distance;
		std::uint32_t child;
	};

	struct Node
	{
		PerceptualHash hash;
		std::vector<EntryId> payloads;
		std::vector<Edge> children;
	};

	void insert(PerceptualHash hash, EntryId payload);

	// Every stored (hash, payload) with distance <= radius, in pre-order.
	std::vector<BkMatch> search_radius(PerceptualHash query, int radius, SearchStats* stats = nullptr) const;

	// Global minimum-distance entry if that minimum is <= max_radius; ties go
	// to the smallest payload.
	std::optional<BkMatch> search_best(PerceptualHash query, int max_radius, SearchStats* stats = nullptr) const;

	// Like search_best, but competes against an incumbent found elsewhere
	// (e.g. another bucket) and only replaces it with a strictly better match
	// under the same (distance, payload) order.
	void refine_best(PerceptualHash query, int max_radius, std::optional<BkMatch>& best, SearchStats* stats = nullptr) const;

	bool empty() const { return m_nodes.empty(); }
	std::size_t size() const { return m_count; }
	std::size_t node_count() const { return m_nodes.size(); }
	const std::vector<Node>& nodes() const { return m_nodes; }

	// Checks the edge-distance and edge-uniqueness invariants over the whole
	// tree and that every node is reachable exactly once.
	bool validate() const;

	// Pre-order record stream of this tree's actual shape. One line per node:
	//   <edge> <HASH> <child-count> <id>[,<id>...]
	// The root's edge is 0; children follow in ascending edge order.
	std::string serialize() const;

	// The tree obtained by inserting the same entry set in ascending hash
	// order. Its serialization depends only on the entry set.
	BkTree canonical() const;
	std::string canonical_serialization() const { return canonical().serialize(); }

	// Inverse of serialize(). Throws IntegrityError on malformed input or a
	// stream that violates the tree invariants.
	static BkTree deserialize(std::string_view text);

	// Test hook: overwrite a stored hash in place without restructuring,
	// simulating tampering with the off-chain store.
	void overwrite_hash_unchecked(std::size_t node_index, PerceptualHash hash) { m_nodes.at(node_index).hash = hash; }

private:
	std::vector<Node> m_nodes;
	std::size_t m_count{0};
};

} // namespace phreg
