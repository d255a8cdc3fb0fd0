#include "bucket_format.hpp"

#include "phreg/error.hpp"

#include <algorithm>
#include <charconv>

namespace phreg::detail {

namespace {

bool unreserved(unsigned char c)
{
	return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '-' || c == '.' || c == '_'
	       || c == '~';
}

void percent_encode(std::string& out, std::string_view s)
{
	static constexpr char digits[] = "0123456789ABCDEF";
	for (unsigned char c : s) {
		if (unreserved(c)) {
			out += static_cast<char>(c);
		} else {
			out += '%';
			out += digits[c >> 4];
			out += digits[c & 0xF];
		}
	}
}

std::string percent_decode(std::string_view s)
{
	auto hex = [](char c) -> int {
		if (c >= '0' && c <= '9')
			return c - '0';
		if (c >= 'A' && c <= 'F')
			return c - 'A' + 10;
		return -1;
	};
	std::string out;
	for (std::size_t i = 0; i < s.size(); ++i) {
		if (s[i] != '%') {
			out += s[i];
			continue;
		}
		if (i + 2 >= s.size())
			throw IntegrityError("bucket: truncated percent escape");
		const int hi = hex(s[i + 1]);
		const int lo = hex(s[i + 2]);
		if (hi < 0 || lo < 0)
			throw IntegrityError("bucket: bad percent escape");
		out += static_cast<char>((hi << 4) | lo);
		i += 2;
	}
	return out;
}

std::string_view next_field(std::string_view& line)
{
	const auto pos = line.find(' ');
	auto field = line.substr(0, pos);
	line.remove_prefix(pos == std::string_view::npos ? line.size() : pos + 1);
	return field;
}

RegistryEntry parse_entry_line(std::string_view line)
{
	RegistryEntry e;
	const auto id_text = next_field(line);
	auto [ptr, ec] = std::from_chars(id_text.data(), id_text.data() + id_text.size(), e.entry_id);
	if (id_text.empty() || ec != std::errc{} || ptr != id_text.data() + id_text.size())
		throw IntegrityError("bucket: bad entry id");
	const auto hash = PerceptualHash::from_hex(next_field(line));
	const auto created = parse_iso8601(next_field(line));
	const auto platform = next_field(line);
	const auto extra = next_field(line);
	if (!hash || !created || !platform.starts_with("p:") || !extra.starts_with("x:") || !line.empty())
		throw IntegrityError("bucket: malformed entry line");
	e.hash = *hash;
	e.created_at = *created;
	e.platform_id = percent_decode(platform.substr(2));
	std::string_view kv = extra.substr(2);
	while (!kv.empty()) {
		const auto amp = kv.find('&');
		const auto pair = kv.substr(0, amp);
		kv.remove_prefix(amp == std::string_view::npos ? kv.size() : amp + 1);
		const auto eq = pair.find('=');
		if (eq == std::string_view::npos)
			throw IntegrityError("bucket: malformed extra metadata");
		e.extra.emplace(percent_decode(pair.substr(0, eq)), percent_decode(pair.substr(eq + 1)));
	}
	return e;
}

} // namespace

std::string format_entry_line(const RegistryEntry& e)
{
	std::string out = std::to_string(e.entry_id);
	out += ' ';
	out += e.hash.to_hex();
	out += ' ';
	out += format_iso8601(e.created_at);
	out += " p:";
	percent_encode(out, e.platform_id);
	out += " x:";
	bool first = true;
	for (const auto& [k, v] : e.extra) {
		if (!first)
			out += '&';
		first = false;
		percent_encode(out, k);
		out += '=';
		percent_encode(out, v);
	}
	out += '\n';
	return out;
}

std::string canonical_bucket_text(std::vector<const RegistryEntry*> entries)
{
	std::sort(entries.begin(), entries.end(), [](const RegistryEntry* a, const RegistryEntry* b) {
		return std::pair(a->hash, a->entry_id) < std::pair(b->hash, b->entry_id);
	});
	BkTree canonical;
	for (const RegistryEntry* e : entries)
		canonical.insert(e->hash, e->entry_id);
	std::string out = canonical.serialize();
	out += "--\n";
	std::sort(entries.begin(), entries.end(),
	          [](const RegistryEntry* a, const RegistryEntry* b) { return a->entry_id < b->entry_id; });
	for (const RegistryEntry* e : entries)
		out += format_entry_line(*e);
	return out;
}

std::vector<RegistryEntry> parse_bucket_text(std::string_view text)
{
	const std::string_view separator = "--\n";
	std::size_t split;
	if (text.starts_with(separator))
		split = 0;
	else if (const auto pos = text.find("\n--\n"); pos != std::string_view::npos)
		split = pos + 1;
	else
		throw IntegrityError("bucket: missing entry table");

	const BkTree tree = BkTree::deserialize(text.substr(0, split));
	std::string_view rest = text.substr(split + separator.size());

	std::vector<RegistryEntry> entries;
	while (!rest.empty()) {
		const auto nl = rest.find('\n');
		if (nl == std::string_view::npos)
			throw IntegrityError("bucket: unterminated entry line");
		entries.push_back(parse_entry_line(rest.substr(0, nl)));
		rest.remove_prefix(nl + 1);
	}
	if (entries.empty())
		throw IntegrityError("bucket: no entries");

	std::vector<std::pair<EntryId, PerceptualHash>> in_tree;
	for (const auto& node : tree.nodes())
		for (EntryId id : node.payloads)
			in_tree.emplace_back(id, node.hash);
	std::sort(in_tree.begin(), in_tree.end());
	if (in_tree.size() != entries.size())
		throw IntegrityError("bucket: tree and entry table sizes differ");
	for (std::size_t i = 0; i < entries.size(); ++i)
		if (in_tree[i].first != entries[i].entry_id || in_tree[i].second != entries[i].hash)
			throw IntegrityError("bucket: tree and entry table disagree");

	std::vector<const RegistryEntry*> ptrs;
	for (const auto& e : entries)
		ptrs.push_back(&e);
	if (canonical_bucket_text(std::move(ptrs)) != text)
		throw IntegrityError("bucket: not in canonical form");
	return entries;
}

} // namespace phreg::detail
