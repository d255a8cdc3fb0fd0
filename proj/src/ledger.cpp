#include "phreg/commitment.hpp"

#include "phreg/error.hpp"

#include <charconv>

namespace phreg {

namespace {

constexpr std::string_view ledger_tag = "phreg.ledger.v1";

std::string_view next_field(std::string_view& line)
{
	const auto pos = line.find(' ');
	auto field = line.substr(0, pos);
	line.remove_prefix(pos == std::string_view::npos ? line.size() : pos + 1);
	return field;
}

std::uint64_t parse_u64(std::string_view field)
{
	std::uint64_t v = 0;
	auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
	if (field.empty() || ec != std::errc{} || ptr != field.data() + field.size() || (field.size() > 1 && field[0] == '0'))
		throw IntegrityError("ledger: bad number '" + std::string(field) + "'");
	return v;
}

} // namespace

Digest Ledger::chain_digest(const Digest& previous, std::uint64_t sequence, Timestamp when, PrefixKey prefix,
                            std::uint64_t version, const Digest& root)
{
	Sha256 h;
	h.update(ledger_tag);
	h.update(previous);
	h.update_be64(sequence);
	h.update_be64(static_cast<std::uint64_t>(when.time_since_epoch().count()));
	h.update(static_cast<std::uint8_t>(prefix.value() >> 8));
	h.update(static_cast<std::uint8_t>(prefix.value() & 0xFF));
	h.update_be64(version);
	h.update(root);
	return h.finish();
}

Digest Ledger::head() const
{
	return m_records.empty() ? Digest{} : m_records.back().record_digest;
}

const LedgerRecord& Ledger::append(Timestamp when, PrefixKey prefix, std::uint64_t version, const Digest& root)
{
	LedgerRecord r;
	r.sequence = m_records.size();
	r.timestamp = when;
	r.prefix = prefix;
	r.version = version;
	r.root = root;
	r.record_digest = chain_digest(head(), r.sequence, when, prefix, version, root);
	m_records.push_back(r);
	return m_records.back();
}

bool Ledger::verify_chain() const
{
	Digest previous{};
	for (std::size_t i = 0; i < m_records.size(); ++i) {
		const LedgerRecord& r = m_records[i];
		if (r.sequence != i)
			return false;
		if (chain_digest(previous, r.sequence, r.timestamp, r.prefix, r.version, r.root) != r.record_digest)
			return false;
		previous = r.record_digest;
	}
	return true;
}

std::string Ledger::format_record(const LedgerRecord& r)
{
	std::string out;
	out += std::to_string(r.sequence);
	out += ' ';
	out += format_iso8601(r.timestamp);
	out += ' ';
	out += r.prefix.to_hex();
	out += ' ';
	out += std::to_string(r.version);
	out += ' ';
	out += to_hex(r.root);
	out += ' ';
	out += to_hex(r.record_digest);
	return out;
}

LedgerRecord Ledger::parse_record(std::string_view line)
{
	LedgerRecord r;
	r.sequence = parse_u64(next_field(line));
	const auto ts = parse_iso8601(next_field(line));
	const auto prefix_text = next_field(line);
	const auto prefix = PrefixKey::from_hex(prefix_text);
	r.version = parse_u64(next_field(line));
	const auto root = digest_from_hex(next_field(line));
	const auto record = digest_from_hex(next_field(line));
	if (!ts || !prefix || prefix->to_hex() != prefix_text || !root || !record || !line.empty())
		throw IntegrityError("ledger: malformed record");
	r.timestamp = *ts;
	r.prefix = *prefix;
	r.root = *root;
	r.record_digest = *record;
	return r;
}

Ledger Ledger::parse(std::string_view text)
{
	Ledger ledger;
	while (!text.empty()) {
		const auto nl = text.find('\n');
		if (nl == std::string_view::npos)
			break; // torn final write
		const LedgerRecord r = parse_record(text.substr(0, nl));
		text.remove_prefix(nl + 1);
		if (r.sequence != ledger.size()
		    || chain_digest(ledger.head(), r.sequence, r.timestamp, r.prefix, r.version, r.root) != r.record_digest)
			throw IntegrityError("ledger: chain broken at record " + std::to_string(ledger.size()));
		ledger.m_records.push_back(r);
	}
	return ledger;
}

const LedgerRecord& update_commitment(CommitmentTrie& trie, Ledger& ledger, PrefixKey prefix,
                                      const Digest& bucket_digest, Timestamp when)
{
	const std::uint64_t version = trie.update(prefix, bucket_digest);
	return ledger.append(when, prefix, version, trie.root());
}

} // namespace phreg
