#include "phreg/registry.hpp"

#include "phreg/error.hpp"

#include "bucket_format.hpp"
#include "registry_internal.hpp"

#include <algorithm>
#include <mutex>

namespace phreg {

namespace {

// Grows geometrically so repeated single-element reservations stay amortized.
template <typename Vec>
void reserve_one_more(Vec& v)
{
	if (v.size() == v.capacity())
		v.reserve(std::max<std::size_t>(16, v.size() * 2));
}

} // namespace

std::string_view to_string(Outcome outcome)
{
	switch (outcome) {
	case Outcome::ExactMatch:
		return "ExactMatch";
	case Outcome::PotentialMatch:
		return "PotentialMatch";
	case Outcome::NonMatch:
		return "NonMatch";
	}
	return "NonMatch";
}

void RegistryConfig::validate() const
{
	if (flip_tolerance < 0 || flip_tolerance > max_flip_tolerance)
		throw ConfigError("flip tolerance must be in [0, 4], got " + std::to_string(flip_tolerance));
	if (tau < 0 || tau > hash_bits)
		throw ConfigError("tau must be in [0, 64], got " + std::to_string(tau));
}

Registry::Registry(RegistryConfig config, Clock clock)
	: m_config{config}, m_clock{std::move(clock)}, m_buckets(prefix_space), m_dirty(prefix_space, false)
{
	m_config.validate();
}

Registry::Registry(Registry&& other) noexcept
	: m_config{other.m_config},
	  m_clock{std::move(other.m_clock)},
	  m_entries{std::move(other.m_entries)},
	  m_buckets{std::move(other.m_buckets)},
	  m_trie{std::move(other.m_trie)},
	  m_ledger{std::move(other.m_ledger)},
	  m_saved_dir{std::move(other.m_saved_dir)},
	  m_saved_ledger_size{other.m_saved_ledger_size},
	  m_dirty{std::move(other.m_dirty)}
{
}

Registry::~Registry() = default;

std::string Registry::serialize_entries(std::vector<std::pair<PerceptualHash, EntryId>> members) const
{
	std::vector<const RegistryEntry*> ptrs;
	ptrs.reserve(members.size());
	for (const auto& m : members)
		ptrs.push_back(&m_entries[m.second]);
	return detail::canonical_bucket_text(std::move(ptrs));
}

std::string Registry::serialize_bucket(const Bucket& bucket) const
{
	std::vector<std::pair<PerceptualHash, EntryId>> members;
	members.reserve(bucket.ids.size());
	for (EntryId id : bucket.ids)
		members.emplace_back(m_entries[id].hash, id);
	return serialize_entries(std::move(members));
}

RegistryEntry Registry::register_hash(PerceptualHash hash, EntryMetadata metadata)
{
	std::unique_lock lock(m_mutex);

	const PrefixKey prefix = extract_prefix(hash, m_config.scheme);
	const Timestamp now = m_clock();

	RegistryEntry entry;
	entry.entry_id = m_entries.size();
	entry.hash = hash;
	entry.created_at = metadata.created_at.value_or(now);
	entry.platform_id = std::move(metadata.platform_id);
	entry.extra = std::move(metadata.extra);

	// Everything that can throw happens before the first mutation.
	auto& slot = m_buckets[prefix.value()];
	std::unique_ptr<Bucket> fresh;
	Bucket* bucket = slot.get();
	if (!bucket) {
		fresh = std::make_unique<Bucket>();
		bucket = fresh.get();
	}

	std::vector<std::pair<PerceptualHash, EntryId>> members;
	members.reserve(bucket->ids.size() + 1);
	for (EntryId id : bucket->ids)
		members.emplace_back(m_entries[id].hash, id);
	reserve_one_more(m_entries);
	m_ledger.reserve_one_more();
	m_entries.push_back(entry);
	Digest digest;
	try {
		members.emplace_back(hash, entry.entry_id);
		digest = bucket_digest(serialize_entries(std::move(members)));
		reserve_one_more(bucket->ids);
		bucket->tree.insert(hash, entry.entry_id);
	} catch (...) {
		m_entries.pop_back();
		throw;
	}

	bucket->ids.push_back(entry.entry_id);
	if (fresh)
		slot = std::move(fresh);
	m_dirty[prefix.value()] = true;
	update_commitment(m_trie, m_ledger, prefix, digest, now);
	return entry;
}

Verdict Registry::verify(PerceptualHash hash, const VerifyOptions& options) const
{
	const int tau = options.tau.value_or(m_config.tau);
	const int tolerance = options.flip_tolerance.value_or(m_config.flip_tolerance);
	if (tau < 0 || tau > hash_bits)
		throw ConfigError("tau must be in [0, 64], got " + std::to_string(tau));
	if (tolerance < 0 || tolerance > max_flip_tolerance)
		throw ConfigError("flip tolerance must be in [0, 4], got " + std::to_string(tolerance));

	std::shared_lock lock(m_mutex);

	Verdict v;
	v.query = hash;
	v.prefix = extract_prefix(hash, m_config.scheme);

	std::optional<BkMatch> best;
	auto search = [&](PrefixKey key) {
		++v.buckets_searched;
		const Bucket* b = m_buckets[key.value()].get();
		if (!b)
			return;
		v.candidates_checked += b->ids.size();
		b->tree.refine_best(hash, hash_bits, best);
	};

	search(v.prefix);
	if (!best || best->distance != 0) {
		const auto neighbors = enumerate_neighbors(v.prefix, tolerance);
		// neighbors[0] is the home bucket, already searched.
		for (std::size_t i = 1; i < neighbors.size(); ++i)
			search(neighbors[i]);
	}

	if (!best)
		return v;
	v.min_distance = best->distance;
	if (best->distance == 0)
		v.outcome = Outcome::ExactMatch;
	else if (best->distance <= tau)
		v.outcome = Outcome::PotentialMatch;
	else
		return v;
	v.similarity = similarity_score(best->distance);
	v.matched = m_entries[best->payload];
	return v;
}

RegistryStats Registry::stats() const
{
	std::shared_lock lock(m_mutex);
	RegistryStats s;
	s.total_entries = m_entries.size();
	for (const auto& b : m_buckets) {
		if (!b || b->ids.empty())
			continue;
		++s.non_empty_buckets;
		++s.occupancy_histogram[b->ids.size()];
	}
	return s;
}

std::size_t Registry::size() const
{
	std::shared_lock lock(m_mutex);
	return m_entries.size();
}

Digest Registry::root() const
{
	std::shared_lock lock(m_mutex);
	return m_trie.root();
}

std::optional<RegistryEntry> Registry::entry(EntryId id) const
{
	std::shared_lock lock(m_mutex);
	if (id >= m_entries.size())
		return std::nullopt;
	return m_entries[id];
}

InclusionProof Registry::prove(PrefixKey prefix) const
{
	std::shared_lock lock(m_mutex);
	return m_trie.prove(prefix);
}

std::optional<Digest> Registry::committed_bucket_digest(PrefixKey prefix) const
{
	std::shared_lock lock(m_mutex);
	return m_trie.leaf(prefix);
}

std::uint64_t Registry::bucket_version(PrefixKey prefix) const
{
	std::shared_lock lock(m_mutex);
	return m_trie.version(prefix);
}

std::string Registry::bucket_serialization(PrefixKey prefix) const
{
	std::shared_lock lock(m_mutex);
	const Bucket* b = m_buckets[prefix.value()].get();
	return b ? serialize_bucket(*b) : std::string{};
}

std::vector<LedgerRecord> Registry::ledger_records() const
{
	std::shared_lock lock(m_mutex);
	return m_ledger.records();
}

bool Registry::audit() const
{
	std::shared_lock lock(m_mutex);
	if (!m_ledger.verify_chain() || m_ledger.size() != m_entries.size())
		return false;
	const Digest expected_root = m_ledger.empty() ? CommitmentTrie::empty_root() : m_ledger.back().root;
	if (expected_root != m_trie.root())
		return false;

	CommitmentTrie rebuilt;
	for (std::size_t k = 0; k < prefix_space; ++k) {
		const Bucket* b = m_buckets[k].get();
		const PrefixKey key{static_cast<std::uint16_t>(k)};
		if (!b || b->ids.empty()) {
			if (m_trie.contains(key))
				return false;
			continue;
		}
		if (!b->tree.validate() || b->tree.size() != b->ids.size())
			return false;
		// The tree itself must hold exactly the registered (hash, id) pairs.
		std::vector<std::pair<PerceptualHash, EntryId>> in_tree;
		for (const auto& node : b->tree.nodes())
			for (EntryId id : node.payloads)
				in_tree.emplace_back(node.hash, id);
		std::sort(in_tree.begin(), in_tree.end(), [](const auto& a, const auto& c) { return a.second < c.second; });
		for (std::size_t i = 0; i < in_tree.size(); ++i)
			if (in_tree[i].second != b->ids[i] || in_tree[i].first != m_entries[b->ids[i]].hash
			    || extract_prefix(in_tree[i].first, m_config.scheme) != key)
				return false;
		const Digest d = bucket_digest(serialize_entries(std::move(in_tree)));
		if (m_trie.leaf(key) != d)
			return false;
		rebuilt.set_leaf(key, d, m_trie.version(key));
	}
	return rebuilt.root() == m_trie.root();
}

void Registry::tamper_with_bucket(PrefixKey prefix, std::size_t node_index, PerceptualHash hash)
{
	std::unique_lock lock(m_mutex);
	Bucket* b = m_buckets[prefix.value()].get();
	if (!b)
		throw NotFoundError("no bucket " + prefix.to_hex());
	b->tree.overwrite_hash_unchecked(node_index, hash);
}

// ---------------------------------------------------------------------------
// JSON

nlohmann::json to_json(const RegistryConfig& config)
{
	return nlohmann::json{
		{"scheme", std::string(to_string(config.scheme))},
		{"flip_tolerance", config.flip_tolerance},
		{"tau", config.tau},
	};
}

RegistryConfig config_from_json(const nlohmann::json& j)
{
	try {
		RegistryConfig c;
		c.scheme = parse_prefix_scheme(j.at("scheme").get<std::string>());
		c.flip_tolerance = j.at("flip_tolerance").get<int>();
		c.tau = j.at("tau").get<int>();
		c.validate();
		return c;
	} catch (const nlohmann::json::exception& e) {
		throw ConfigError(std::string("malformed registry config: ") + e.what());
	}
}

nlohmann::json to_json(const RegistryEntry& entry)
{
	return nlohmann::json{
		{"entry_id", entry.entry_id},
		{"hash", entry.hash.to_hex()},
		{"created_at", format_iso8601(entry.created_at)},
		{"platform_id", entry.platform_id},
		{"extra", entry.extra},
	};
}

nlohmann::json to_json(const Verdict& v)
{
	nlohmann::json j{
		{"outcome", std::string(to_string(v.outcome))},
		{"query", v.query.to_hex()},
		{"prefix", v.prefix.to_hex()},
		{"min_distance", nullptr},
		{"similarity", nullptr},
		{"matched", nullptr},
		{"buckets_searched", v.buckets_searched},
		{"candidates_checked", v.candidates_checked},
	};
	if (v.min_distance)
		j["min_distance"] = *v.min_distance;
	if (v.similarity)
		j["similarity"] = v.similarity->percent();
	if (v.matched)
		j["matched"] = to_json(*v.matched);
	return j;
}

nlohmann::json to_json(const RegistryStats& s)
{
	nlohmann::json hist = nlohmann::json::object();
	for (const auto& [occ, count] : s.occupancy_histogram)
		hist[std::to_string(occ)] = count;
	return nlohmann::json{
		{"total_entries", s.total_entries},
		{"non_empty_buckets", s.non_empty_buckets},
		{"bucket_space", prefix_space},
		{"mean_occupancy", s.mean_occupancy()},
		{"occupancy_histogram", std::move(hist)},
	};
}

} // namespace phreg
