#include "phreg/registry.hpp"

#include "phreg/error.hpp"

#include "bucket_format.hpp"
#include "registry_internal.hpp"

#include <algorithm>
#include <fstream>
#include <iterator>
#include <mutex>

namespace fs = std::filesystem;

namespace phreg {

namespace {

constexpr std::string_view header_name = "registry.json";
constexpr std::string_view ledger_name = "ledger.log";
constexpr std::string_view bucket_dir = "buckets";
constexpr std::string_view bucket_ext = ".bkt";
constexpr std::string_view format_tag = "phreg-registry";
constexpr int format_version = 1;

std::string read_file(const fs::path& path)
{
	std::ifstream in(path, std::ios::binary);
	if (!in)
		throw StorageError("cannot read '" + path.string() + "'");
	return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

// Write-to-temp then rename, so readers never see a half-written file.
void write_file_atomic(const fs::path& path, std::string_view content)
{
	const fs::path tmp = path.string() + ".tmp";
	{
		std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
		out.write(content.data(), static_cast<std::streamsize>(content.size()));
		out.flush();
		if (!out)
			throw StorageError("failed to write '" + tmp.string() + "'");
	}
	std::error_code ec;
	fs::rename(tmp, path, ec);
	if (ec)
		throw StorageError("failed to commit '" + path.string() + "': " + ec.message());
}

void append_file(const fs::path& path, std::string_view content)
{
	std::ofstream out(path, std::ios::binary | std::ios::app);
	out.write(content.data(), static_cast<std::streamsize>(content.size()));
	out.flush();
	if (!out)
		throw StorageError("failed to append to '" + path.string() + "'");
}

fs::path bucket_path(const fs::path& dir, PrefixKey key)
{
	return dir / bucket_dir / (key.to_hex() + std::string(bucket_ext));
}

nlohmann::json make_header(const RegistryConfig& config, std::size_t entries, std::size_t buckets, const Digest& root,
                           const Digest& head)
{
	return nlohmann::json{
		{"format", format_tag},
		{"version", format_version},
		{"config", to_json(config)},
		{"entries", entries},
		{"buckets", buckets},
		{"root", to_hex(root)},
		{"ledger_head", to_hex(head)},
	};
}

} // namespace

void Registry::init(const fs::path& dir, const RegistryConfig& config)
{
	config.validate();
	if (fs::exists(dir / header_name))
		throw StorageError("registry already exists at '" + dir.string() + "'");
	std::error_code ec;
	fs::create_directories(dir / bucket_dir, ec);
	if (ec)
		throw StorageError("cannot create '" + dir.string() + "': " + ec.message());
	write_file_atomic(dir / ledger_name, "");
	write_file_atomic(dir / header_name,
	                  make_header(config, 0, 0, CommitmentTrie::empty_root(), Digest{}).dump(2) + "\n");
}

void Registry::write_bucket_file(const fs::path& dir, std::size_t key) const
{
	const PrefixKey prefix{static_cast<std::uint16_t>(key)};
	write_file_atomic(bucket_path(dir, prefix), serialize_bucket(*m_buckets[key]));
}

void Registry::save(const fs::path& dir)
{
	// Exclusive: the dirty set and the persisted-ledger mark change here.
	std::unique_lock lock(m_mutex);

	std::error_code ec;
	fs::create_directories(dir / bucket_dir, ec);
	if (ec)
		throw StorageError("cannot create '" + dir.string() + "': " + ec.message());

	const bool incremental = m_saved_dir && fs::equivalent(*m_saved_dir, dir, ec) && !ec;

	// 1. Bucket files. Uncommitted extras are rolled back on restore.
	std::size_t buckets = 0;
	for (std::size_t k = 0; k < prefix_space; ++k) {
		if (!m_buckets[k] || m_buckets[k]->ids.empty())
			continue;
		++buckets;
		if (!incremental || m_dirty[k])
			write_bucket_file(dir, k);
	}
	if (!incremental) {
		// Drop stale bucket files left by whatever lived here before.
		for (const auto& f : fs::directory_iterator(dir / bucket_dir)) {
			const auto key = PrefixKey::from_hex(f.path().stem().string());
			if (!key || !m_buckets[key->value()] || m_buckets[key->value()]->ids.empty())
				fs::remove(f.path(), ec);
		}
	}

	// 2. Ledger: the commit point.
	std::string lines;
	const std::size_t from = incremental ? m_saved_ledger_size : 0;
	for (std::size_t i = from; i < m_ledger.size(); ++i) {
		lines += Ledger::format_record(m_ledger.records()[i]);
		lines += '\n';
	}
	if (incremental)
		append_file(dir / ledger_name, lines);
	else
		write_file_atomic(dir / ledger_name, lines);

	// 3. Header.
	write_file_atomic(dir / header_name,
	                  make_header(m_config, m_entries.size(), buckets, m_trie.root(), m_ledger.head()).dump(2) + "\n");

	m_saved_dir = fs::absolute(dir);
	m_saved_ledger_size = m_ledger.size();
	std::fill(m_dirty.begin(), m_dirty.end(), false);
}

Registry Registry::restore(const fs::path& dir, Clock clock, RestoreReport* report)
{
	if (!fs::exists(dir / header_name))
		throw StorageError("no registry at '" + dir.string() + "'");

	nlohmann::json header;
	try {
		header = nlohmann::json::parse(read_file(dir / header_name));
	} catch (const nlohmann::json::exception& e) {
		throw IntegrityError(std::string("registry header unreadable: ") + e.what());
	}
	if (header.value("format", "") != format_tag || header.value("version", 0) != format_version)
		throw IntegrityError("registry header has unknown format");
	const RegistryConfig config = config_from_json(header.at("config"));

	Registry reg(config, std::move(clock));
	reg.m_ledger = Ledger::parse(read_file(dir / ledger_name));
	const std::size_t committed = reg.m_ledger.size();
	if (header.value("entries", std::size_t{0}) > committed)
		throw IntegrityError("ledger is missing committed records");

	// Bucket files.
	std::vector<std::optional<RegistryEntry>> entries(committed);
	std::size_t rolled_back = 0;
	if (fs::exists(dir / bucket_dir)) {
		for (const auto& f : fs::directory_iterator(dir / bucket_dir)) {
			const auto name = f.path().filename().string();
			if (name.ends_with(".tmp"))
				continue; // interrupted write, never renamed into place
			const auto key = PrefixKey::from_hex(f.path().stem().string());
			if (!key || f.path().extension() != bucket_ext || key->to_hex() != f.path().stem().string())
				throw IntegrityError("unexpected file in bucket directory: " + name);
			for (auto& e : detail::parse_bucket_text(read_file(f.path()))) {
				if (extract_prefix(e.hash, config.scheme) != *key)
					throw IntegrityError("entry " + std::to_string(e.entry_id) + " filed under wrong bucket " + name);
				if (e.entry_id >= committed) {
					++rolled_back;
					continue;
				}
				if (entries[e.entry_id])
					throw IntegrityError("entry " + std::to_string(e.entry_id) + " stored twice");
				entries[e.entry_id] = std::move(e);
			}
		}
	}

	reg.m_entries.reserve(committed);
	for (std::size_t id = 0; id < committed; ++id) {
		if (!entries[id])
			throw IntegrityError("committed entry " + std::to_string(id) + " missing from bucket files");
		const LedgerRecord& rec = reg.m_ledger.records()[id];
		if (rec.prefix != extract_prefix(entries[id]->hash, config.scheme))
			throw IntegrityError("ledger record " + std::to_string(id) + " names a different bucket");
		reg.m_entries.push_back(std::move(*entries[id]));
	}

	// Rebuild buckets in registration order and check ledger versions.
	for (const RegistryEntry& e : reg.m_entries) {
		const PrefixKey key = extract_prefix(e.hash, config.scheme);
		auto& slot = reg.m_buckets[key.value()];
		if (!slot)
			slot = std::make_unique<Bucket>();
		slot->tree.insert(e.hash, e.entry_id);
		slot->ids.push_back(e.entry_id);
		if (reg.m_ledger.records()[e.entry_id].version != slot->ids.size())
			throw IntegrityError("ledger version sequence broken at record " + std::to_string(e.entry_id));
	}

	for (std::size_t k = 0; k < prefix_space; ++k) {
		if (!reg.m_buckets[k])
			continue;
		const PrefixKey key{static_cast<std::uint16_t>(k)};
		reg.m_trie.set_leaf(key, bucket_digest(reg.serialize_bucket(*reg.m_buckets[k])), reg.m_buckets[k]->ids.size());
	}

	const Digest ledger_root = committed ? reg.m_ledger.back().root : CommitmentTrie::empty_root();
	if (reg.m_trie.root() != ledger_root)
		throw IntegrityError("bucket contents do not match the ledger root commitment");
	if (header.value("entries", std::size_t{0}) == committed && header.value("root", "") != to_hex(ledger_root))
		throw IntegrityError("registry header root disagrees with the ledger");

	// After a rollback the directory holds stale bucket files, so the next save is a full one.
	if (!rolled_back)
		reg.m_saved_dir = fs::absolute(dir);
	reg.m_saved_ledger_size = committed;
	if (report)
		report->rolled_back_entries = rolled_back;
	return reg;
}

} // namespace phreg
