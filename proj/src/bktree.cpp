#include "phreg/bktree.hpp"

#include "phreg/error.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <utility>

namespace phreg {

// Strong exception guarantee: every allocation happens before the first
// visible change.
void BkTree::insert(PerceptualHash hash, EntryId payload)
{
	if (m_nodes.empty()) {
		m_nodes.push_back(Node{hash, {payload}, {}});
		++m_count;
		return;
	}
	std::uint32_t current = 0;
	for (;;) {
		Node& node = m_nodes[current];
		const int d = hamming_distance(node.hash, hash);
		if (d == 0) {
			auto it = std::upper_bound(node.payloads.begin(), node.payloads.end(), payload);
			node.payloads.insert(it, payload);
			++m_count;
			return;
		}
		auto it = std::lower_bound(node.children.begin(), node.children.end(), d,
		                           [](const Edge& e, int v) { return e.distance < v; });
		if (it != node.children.end() && it->distance == d) {
			current = it->child;
			continue;
		}
		const auto child = static_cast<std::uint32_t>(m_nodes.size());
		const auto edge_pos = it - node.children.begin();
		Node fresh{hash, {payload}, {}};
		node.children.reserve(node.children.size() + 1);
		if (m_nodes.size() == m_nodes.capacity())
			m_nodes.reserve(m_nodes.size() * 2);
		// Both remaining steps are non-throwing now; `node` is re-fetched
		// because reserve may have moved it.
		Node& parent = m_nodes[current];
		parent.children.insert(parent.children.begin() + edge_pos, Edge{static_cast<std::uint8_t>(d), child});
		m_nodes.push_back(std::move(fresh));
		++m_count;
		return;
	}
}

std::vector<BkMatch> BkTree::search_radius(PerceptualHash query, int radius, SearchStats* stats) const
{
	std::vector<BkMatch> out;
	if (m_nodes.empty())
		return out;
	std::vector<std::uint32_t> stack{0};
	while (!stack.empty()) {
		const Node& node = m_nodes[stack.back()];
		stack.pop_back();
		if (stats)
			++stats->nodes_visited;
		const int d = hamming_distance(node.hash, query);
		if (d <= radius)
			for (EntryId id : node.payloads)
				out.push_back(BkMatch{node.hash, id, d});
		// Reverse push so children pop in ascending edge order.
		for (auto it = node.children.rbegin(); it != node.children.rend(); ++it)
			if (std::abs(it->distance - d) <= radius)
				stack.push_back(it->child);
	}
	return out;
}

void BkTree::refine_best(PerceptualHash query, int max_radius, std::optional<BkMatch>& best, SearchStats* stats) const
{
	if (m_nodes.empty())
		return;
	int bound = best ? std::min(best->distance, max_radius) : max_radius;
	std::vector<std::uint32_t> stack{0};
	while (!stack.empty()) {
		const Node& node = m_nodes[stack.back()];
		stack.pop_back();
		if (stats)
			++stats->nodes_visited;
		const int d = hamming_distance(node.hash, query);
		if (d <= bound) {
			const EntryId id = node.payloads.front();
			if (!best || d < best->distance || (d == best->distance && id < best->payload)) {
				best = BkMatch{node.hash, id, d};
				bound = d;
			}
		}
		for (auto it = node.children.rbegin(); it != node.children.rend(); ++it)
			if (std::abs(it->distance - d) <= bound)
				stack.push_back(it->child);
	}
}

std::optional<BkMatch> BkTree::search_best(PerceptualHash query, int max_radius, SearchStats* stats) const
{
	std::optional<BkMatch> best;
	refine_best(query, max_radius, best, stats);
	return best;
}

bool BkTree::validate() const
{
	if (m_nodes.empty())
		return m_count == 0;
	std::vector<bool> seen(m_nodes.size(), false);
	std::size_t payloads = 0;
	std::vector<std::uint32_t> stack{0};
	while (!stack.empty()) {
		const std::uint32_t idx = stack.back();
		stack.pop_back();
		if (idx >= m_nodes.size() || seen[idx])
			return false;
		seen[idx] = true;
		const Node& node = m_nodes[idx];
		if (node.payloads.empty())
			return false;
		payloads += node.payloads.size();
		int prev = 0;
		for (const Edge& e : node.children) {
			if (e.distance <= prev || e.child >= m_nodes.size())
				return false;
			if (hamming_distance(node.hash, m_nodes[e.child].hash) != e.distance)
				return false;
			prev = e.distance;
			stack.push_back(e.child);
		}
	}
	return payloads == m_count && std::all_of(seen.begin(), seen.end(), [](bool b) { return b; });
}

std::string BkTree::serialize() const
{
	std::string out;
	if (m_nodes.empty())
		return out;
	out.reserve(m_nodes.size() * 32);
	std::vector<std::pair<std::uint32_t, int>> stack{{0, 0}};
	while (!stack.empty()) {
		const auto [idx, edge] = stack.back();
		stack.pop_back();
		const Node& node = m_nodes[idx];
		out += std::to_string(edge);
		out += ' ';
		out += node.hash.to_hex();
		out += ' ';
		out += std::to_string(node.children.size());
		out += ' ';
		for (std::size_t i = 0; i < node.payloads.size(); ++i) {
			if (i)
				out += ',';
			out += std::to_string(node.payloads[i]);
		}
		out += '\n';
		for (auto it = node.children.rbegin(); it != node.children.rend(); ++it)
			stack.emplace_back(it->child, it->distance);
	}
	return out;
}

BkTree BkTree::canonical() const
{
	std::vector<const Node*> order;
	order.reserve(m_nodes.size());
	for (const Node& n : m_nodes)
		order.push_back(&n);
	std::sort(order.begin(), order.end(), [](const Node* a, const Node* b) { return a->hash < b->hash; });
	BkTree out;
	out.m_nodes.reserve(m_nodes.size());
	for (const Node* n : order)
		for (EntryId id : n->payloads)
			out.insert(n->hash, id);
	return out;
}

namespace {

class LineReader
{
public:
	explicit LineReader(std::string_view text) : m_rest{text} {}

	bool done() const { return m_rest.empty(); }

	std::string_view next_line()
	{
		const auto nl = m_rest.find('\n');
		if (nl == std::string_view::npos)
			throw IntegrityError("bk stream: unterminated record");
		auto line = m_rest.substr(0, nl);
		m_rest.remove_prefix(nl + 1);
		return line;
	}

private:
	std::string_view m_rest;
};

template <typename T>
T parse_number(std::string_view field)
{
	T v{};
	auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
	if (ec != std::errc{} || ptr != field.data() + field.size() || field.empty()
	    || (field.size() > 1 && field.front() == '0'))
		throw IntegrityError("bk stream: bad number '" + std::string(field) + "'");
	return v;
}

std::string_view take_field(std::string_view& line, char sep)
{
	const auto pos = line.find(sep);
	auto field = line.substr(0, pos);
	line.remove_prefix(pos == std::string_view::npos ? line.size() : pos + 1);
	return field;
}

} // namespace

BkTree BkTree::deserialize(std::string_view text)
{
	BkTree tree;
	LineReader reader(text);

	struct Frame
	{
		std::uint32_t node;
		std::size_t remaining;
		int last_edge;
	};
	std::vector<Frame> stack;
	bool have_root = false;

	while (!reader.done()) {
		std::string_view line = reader.next_line();
		const int edge = parse_number<int>(take_field(line, ' '));
		const auto hash_text = take_field(line, ' ');
		const auto child_count = parse_number<std::size_t>(take_field(line, ' '));
		const auto payload_text = line;

		const auto hash = PerceptualHash::from_hex(hash_text);
		if (!hash || hash->to_hex() != hash_text)
			throw IntegrityError("bk stream: bad hash '" + std::string(hash_text) + "'");

		Node node{*hash, {}, {}};
		std::string_view rest = payload_text;
		if (rest.empty())
			throw IntegrityError("bk stream: node without payloads");
		while (!rest.empty()) {
			const auto id = parse_number<EntryId>(take_field(rest, ','));
			if (!node.payloads.empty() && id <= node.payloads.back())
				throw IntegrityError("bk stream: payload ids not strictly ascending");
			node.payloads.push_back(id);
		}
		if (payload_text.back() == ',')
			throw IntegrityError("bk stream: trailing separator");

		const auto index = static_cast<std::uint32_t>(tree.m_nodes.size());
		if (!have_root) {
			if (edge != 0)
				throw IntegrityError("bk stream: root must carry edge 0");
			have_root = true;
		} else {
			if (stack.empty())
				throw IntegrityError("bk stream: more than one root");
			Frame& parent = stack.back();
			Node& pnode = tree.m_nodes[parent.node];
			if (edge <= parent.last_edge || hamming_distance(pnode.hash, *hash) != edge)
				throw IntegrityError("bk stream: edge label does not match parent distance");
			pnode.children.push_back(Edge{static_cast<std::uint8_t>(edge), index});
			parent.last_edge = edge;
			if (--parent.remaining == 0)
				stack.pop_back();
		}
		tree.m_count += node.payloads.size();
		tree.m_nodes.push_back(std::move(node));
		if (child_count > 0)
			stack.push_back(Frame{index, child_count, 0});
	}
	if (!stack.empty())
		throw IntegrityError("bk stream: truncated (missing children)");
	return tree;
}

} // namespace phreg
