#pragma once

#include "phreg/bktree.hpp"
#include "phreg/commitment.hpp"
#include "phreg/hash.hpp"
#include "phreg/prefix.hpp"
#include "phreg/rw_mutex.hpp"
#include "phreg/timeutil.hpp"

#include "json.hpp"

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

namespace phreg {

// Fixed for the life of a registry and recorded in its snapshot header.
struct RegistryConfig
{
	PrefixScheme scheme{PrefixScheme::Discontinuous};
	int flip_tolerance{2};
	int tau{6};

	// Throws ConfigError when a field is out of range.
	void validate() const;

	bool operator==(const RegistryConfig&) const = default;
};

struct EntryMetadata
{
	// Defaults to the registry clock when unset.
	std::optional<Timestamp> created_at;
	std::string platform_id;
	std::map<std::string, std::string> extra;
};

struct RegistryEntry
{
	EntryId entry_id{0};
	PerceptualHash hash;
	Timestamp created_at{};
	std::string platform_id;
	std::map<std::string, std::string> extra;

	bool operator==(const RegistryEntry&) const = default;
};

enum class Outcome { ExactMatch, PotentialMatch, NonMatch };

std::string_view to_string(Outcome outcome);

struct Verdict
{
	Outcome outcome{Outcome::NonMatch};
	PerceptualHash query;
	PrefixKey prefix;
	// Minimum distance over every candidate examined; absent when the search
	// scope held no entries at all.
	std::optional<int> min_distance;
	// Set for ExactMatch and PotentialMatch only.
	std::optional<SimilarityScore> similarity;
	std::optional<RegistryEntry> matched;
	std::size_t buckets_searched{0};
	// Registered entries held by the buckets that were searched.
	std::size_t candidates_checked{0};
};

// Per-query overrides (CLI --tau / --tolerance, harness sweeps).
struct VerifyOptions
{
	std::optional<int> tau;
	std::optional<int> flip_tolerance;
};

struct RegistryStats
{
	std::size_t total_entries{0};
	std::size_t non_empty_buckets{0};
	// occupancy -> number of buckets with exactly that many entries (non-empty only)
	std::map<std::size_t, std::size_t> occupancy_histogram;

	// Entries per bucket over the whole 2^16 key space.
	double mean_occupancy() const { return static_cast<double>(total_entries) / static_cast<double>(prefix_space); }
};

struct RestoreReport
{
	// Entries present in bucket files but never committed to the ledger
	// (interrupted save); they are dropped on restore.
	std::size_t rolled_back_entries{0};
};

// Prefix-bucketed registry of perceptual hashes: one BK-tree per bucket,
// each bucket committed into a CommitmentTrie whose root is logged to an
// append-only Ledger on every registration.
//
// Single writer, many readers: register_hash takes an exclusive lock, all
// read paths a shared one, so readers only ever see fully committed states.
class Registry
{
public:
	explicit Registry(RegistryConfig config = {}, Clock clock = system_now);
	Registry(Registry&& other) noexcept;
	Registry& operator=(Registry&&) = delete;
	Registry(const Registry&) = delete;
	Registry& operator=(const Registry&) = delete;
	~Registry();

	const RegistryConfig& config() const { return m_config; }

	// Inserts into the bucket's BK-tree, recomputes the bucket digest, moves
	// the trie leaf and appends a ledger record, all or nothing.
	RegistryEntry register_hash(PerceptualHash hash, EntryMetadata metadata = {});

	// Home bucket first (exact hit returns immediately), then every neighbor
	// bucket within the flip tolerance; d_min over all candidates decides.
	Verdict verify(PerceptualHash hash, const VerifyOptions& options = {}) const;

	RegistryStats stats() const;
	std::size_t size() const;
	Digest root() const;
	std::optional<RegistryEntry> entry(EntryId id) const;

	// Throws NotFoundError for a prefix with no bucket.
	InclusionProof prove(PrefixKey prefix) const;
	std::optional<Digest> committed_bucket_digest(PrefixKey prefix) const;
	std::uint64_t bucket_version(PrefixKey prefix) const;

	// Canonical serialization of a bucket: its canonical BK stream, a "--"
	// line, then one line per entry in id order. Empty string when absent.
	std::string bucket_serialization(PrefixKey prefix) const;
	std::vector<LedgerRecord> ledger_records() const;

	// Recomputes every bucket digest, the trie root and the ledger chain and
	// checks they agree. False means the in-memory store was tampered with.
	bool audit() const;

	// Writes a snapshot directory: registry.json (config, counts, root),
	// ledger.log, buckets/<PREFIX>.bkt for every non-empty bucket. Saving
	// again to the same directory only rewrites buckets changed since and
	// appends new ledger lines.
	void save(const std::filesystem::path& dir);

	// Throws StorageError when files are missing/unreadable and
	// IntegrityError when any file disagrees with the ledger root.
	static Registry restore(const std::filesystem::path& dir, Clock clock = system_now, RestoreReport* report = nullptr);

	// Creates an empty snapshot directory. Throws StorageError if one exists.
	static void init(const std::filesystem::path& dir, const RegistryConfig& config);

	// Test hook: overwrite a stored hash inside a bucket tree, bypassing
	// digest and commitment maintenance.
	void tamper_with_bucket(PrefixKey prefix, std::size_t node_index, PerceptualHash hash);

private:
	struct Bucket;

	std::string serialize_bucket(const Bucket& bucket) const;
	std::string serialize_entries(std::vector<std::pair<PerceptualHash, EntryId>> members) const;
	void write_bucket_file(const std::filesystem::path& dir, std::size_t key) const;

	RegistryConfig m_config;
	Clock m_clock;
	mutable WriterPreferringMutex m_mutex;
	std::vector<RegistryEntry> m_entries;
	std::vector<std::unique_ptr<Bucket>> m_buckets;
	CommitmentTrie m_trie;
	Ledger m_ledger;

	std::optional<std::filesystem::path> m_saved_dir;
	std::size_t m_saved_ledger_size{0};
	std::vector<bool> m_dirty;
};

nlohmann::json to_json(const RegistryConfig& config);
RegistryConfig config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const RegistryEntry& entry);
// {"outcome", "query", "prefix", "min_distance", "similarity",
//  "matched": {"entry_id", "hash", "platform_id", "created_at", "extra"},
//  "buckets_searched", "candidates_checked"}; absent values are null.
nlohmann::json to_json(const Verdict& verdict);
nlohmann::json to_json(const RegistryStats& stats);

} // namespace phreg
