#include "doctest.h"

#include "phreg/bktree.hpp"
#include "phreg/error.hpp"

#include <algorithm>
#include <numeric>
#include <random>

using namespace phreg;

namespace {

using Triple = std::tuple<std::uint64_t, EntryId, int>;

std::vector<Triple> as_sorted(const std::vector<BkMatch>& ms)
{
	std::vector<Triple> out;
	for (const auto& m : ms)
		out.emplace_back(m.hash.bits(), m.payload, m.distance);
	std::sort(out.begin(), out.end());
	return out;
}

std::vector<Triple> linear_scan(const std::vector<PerceptualHash>& data, PerceptualHash q, int radius)
{
	std::vector<Triple> out;
	for (std::size_t i = 0; i < data.size(); ++i) {
		const int d = hamming_distance(data[i], q);
		if (d <= radius)
			out.emplace_back(data[i].bits(), i, d);
	}
	std::sort(out.begin(), out.end());
	return out;
}

std::vector<PerceptualHash> random_hashes(std::size_t n, std::uint64_t seed)
{
	std::mt19937_64 rng(seed);
	std::vector<PerceptualHash> out;
	for (std::size_t i = 0; i < n; ++i)
		out.emplace_back(rng());
	return out;
}

PerceptualHash flip(PerceptualHash h, std::initializer_list<int> bits)
{
	std::uint64_t v = h.bits();
	for (int b : bits)
		v ^= std::uint64_t{1} << b;
	return PerceptualHash{v};
}

} // namespace

TEST_CASE("insert base case and duplicates")
{
	BkTree t;
	CHECK(t.empty());
	const PerceptualHash h{0xDEADBEEFCAFEF00Dull};
	t.insert(h, 7);
	CHECK(t.size() == 1);
	CHECK(t.node_count() == 1);
	CHECK(t.nodes()[0].hash == h);

	t.insert(h, 3);
	CHECK(t.size() == 2);
	CHECK(t.node_count() == 1);
	CHECK(t.nodes()[0].payloads == std::vector<EntryId>{3, 7});
	CHECK(t.validate());
}

TEST_CASE("1000 random inserts satisfy the edge invariant")
{
	BkTree t;
	const auto data = random_hashes(1000, 11);
	for (std::size_t i = 0; i < data.size(); ++i)
		t.insert(data[i], i);
	CHECK(t.size() == 1000);
	CHECK(t.validate());
	for (const auto& n : t.nodes()) {
		for (std::size_t i = 0; i < n.children.size(); ++i) {
			CHECK(hamming_distance(n.hash, t.nodes()[n.children[i].child].hash) == n.children[i].distance);
			if (i)
				CHECK(n.children[i - 1].distance < n.children[i].distance);
		}
	}
}

TEST_CASE("search on an empty tree")
{
	BkTree t;
	CHECK(t.search_radius(PerceptualHash{1}, 64).empty());
	CHECK_FALSE(t.search_best(PerceptualHash{1}, 64).has_value());
}

TEST_CASE("radius 0 finds exactly the stored entry")
{
	BkTree t;
	const auto data = random_hashes(200, 12);
	for (std::size_t i = 0; i < data.size(); ++i)
		t.insert(data[i], i);
	const auto r = t.search_radius(data[42], 0);
	REQUIRE(r.size() == 1);
	CHECK(r[0].payload == 42);
	CHECK(r[0].distance == 0);
}

TEST_CASE("search_radius equals a linear scan, radii 0..12")
{
	const auto data = random_hashes(10'000, 13);
	BkTree t;
	for (std::size_t i = 0; i < data.size(); ++i)
		t.insert(data[i], i);
	std::mt19937_64 rng(14);
	for (int q = 0; q < 100; ++q) {
		// Half the queries sit near a stored hash so small radii return hits.
		PerceptualHash query{rng()};
		if (q % 2)
			query = PerceptualHash{data[rng() % data.size()].bits() ^ (rng() & rng() & rng())};
		for (int radius = 0; radius <= 12; ++radius)
			REQUIRE(as_sorted(t.search_radius(query, radius)) == linear_scan(data, query, radius));
	}
}

TEST_CASE("pruning is active at radius 2")
{
	const auto data = random_hashes(10'000, 15);
	BkTree t;
	for (std::size_t i = 0; i < data.size(); ++i)
		t.insert(data[i], i);
	std::mt19937_64 rng(16);
	for (int q = 0; q < 20; ++q) {
		SearchStats stats;
		t.search_radius(PerceptualHash{rng()}, 2, &stats);
		CHECK(static_cast<double>(stats.nodes_visited) < 0.6 * static_cast<double>(t.node_count()));
	}
}

TEST_CASE("best match: nearest within the radius, or none")
{
	const PerceptualHash q{0x0F0F0F0F0F0F0F0Full};
	BkTree t;
	t.insert(flip(q, {1, 9, 17, 25, 33, 41, 49, 57, 60}), 1); // d = 9
	t.insert(flip(q, {2, 10, 18, 26, 34}), 2);                // d = 5
	t.insert(flip(q, {3, 11, 19}), 3);                        // d = 3
	const auto best = t.search_best(q, 6);
	REQUIRE(best.has_value());
	CHECK(best->payload == 3);
	CHECK(best->distance == 3);

	BkTree far;
	far.insert(flip(q, {0, 1, 2, 3, 4, 5, 6}), 1); // d = 7
	CHECK_FALSE(far.search_best(q, 6).has_value());
	CHECK(far.search_best(q, 7)->distance == 7);

	BkTree self;
	self.insert(q, 9);
	CHECK(self.search_best(q, 10) == BkMatch{q, 9, 0});
}

TEST_CASE("best match ties go to the smallest payload")
{
	const PerceptualHash q{0};
	BkTree t;
	t.insert(flip(q, {5, 6}), 50);
	t.insert(flip(q, {7, 8}), 20);
	t.insert(flip(q, {9, 10}), 30);
	t.insert(flip(q, {7, 8}), 10);
	const auto best = t.search_best(q, 64);
	REQUIRE(best);
	CHECK(best->payload == 10);

	std::optional<BkMatch> incumbent = BkMatch{PerceptualHash{3}, 5, 2};
	t.refine_best(q, 64, incumbent);
	CHECK(incumbent->payload == 5); // equal distance, smaller id elsewhere wins
}

TEST_CASE("best search equals linear minimum with lowest-id tie break")
{
	const auto data = random_hashes(5000, 17);
	BkTree t;
	for (std::size_t i = 0; i < data.size(); ++i)
		t.insert(data[i], i);
	std::mt19937_64 rng(18);
	for (int q = 0; q < 200; ++q) {
		const PerceptualHash query{rng()};
		int best_d = 65;
		EntryId best_id = 0;
		for (std::size_t i = 0; i < data.size(); ++i) {
			const int d = hamming_distance(data[i], query);
			if (d < best_d)
				best_d = d, best_id = i;
		}
		const auto got = t.search_best(query, 64);
		REQUIRE(got);
		CHECK(got->distance == best_d);
		CHECK(got->payload == best_id);
	}
}

TEST_CASE("results are independent of insertion order; canonical form is too")
{
	const auto data = random_hashes(2000, 19);
	std::vector<std::size_t> order(data.size());
	std::iota(order.begin(), order.end(), std::size_t{0});
	std::shuffle(order.begin(), order.end(), std::mt19937_64(20));

	BkTree a, b;
	for (std::size_t i = 0; i < data.size(); ++i)
		a.insert(data[i], i);
	for (std::size_t i : order)
		b.insert(data[i], i);

	CHECK(a.serialize() != b.serialize());
	CHECK(a.canonical_serialization() == b.canonical_serialization());

	std::mt19937_64 rng(21);
	for (int q = 0; q < 50; ++q) {
		const PerceptualHash query{rng()};
		CHECK(as_sorted(a.search_radius(query, 20)) == as_sorted(b.search_radius(query, 20)));
	}
}

TEST_CASE("serialize / deserialize round trip")
{
	const auto data = random_hashes(500, 22);
	BkTree t;
	for (std::size_t i = 0; i < data.size(); ++i)
		t.insert(data[i], i);
	t.insert(data[3], 900); // duplicate payloads survive
	const std::string s = t.serialize();
	const BkTree back = BkTree::deserialize(s);
	CHECK(back.serialize() == s);
	CHECK(back.size() == t.size());
	CHECK(back.validate());
	CHECK(BkTree::deserialize("").empty());
}

TEST_CASE("deserialize rejects malformed or inconsistent streams")
{
	BkTree t;
	t.insert(PerceptualHash{0}, 1);
	t.insert(PerceptualHash{3}, 2);
	const std::string good = t.serialize();
	REQUIRE(good == "0 0000000000000000 1 1\n2 0000000000000003 0 2\n");

	for (const char* bad : {
	         "0 0000000000000000 1 1\n",                           // missing child
	         "0 0000000000000000 1 1\n3 0000000000000003 0 2\n",   // wrong edge label
	         "1 0000000000000000 0 1\n",                           // root edge not 0
	         "0 0000000000000000 0 1",                             // unterminated
	         "0 000000000000000g 0 1\n",                           // bad hex
	         "0 0000000000000000 0 \n",                            // no payloads
	         "0 0000000000000000 0 2,1\n",                         // payloads not ascending
	         "0 0000000000000000 0 1\n0 0000000000000001 0 2\n",   // second root
	         "0 0000000000000000 01 1\n2 0000000000000003 0 2\n",  // leading zero
	         "0 0000000000000000 1 1,\n2 0000000000000003 0 2\n",  // trailing comma
	         "0 000000000000000a 0 1\n",                           // lowercase hex is not canonical
	     }) {
		CAPTURE(bad);
		CHECK_THROWS_AS(BkTree::deserialize(bad), IntegrityError);
	}
}

TEST_CASE("validate catches an overwritten hash")
{
	const auto data = random_hashes(100, 23);
	BkTree t;
	for (std::size_t i = 0; i < data.size(); ++i)
		t.insert(data[i], i);
	REQUIRE(t.validate());
	std::size_t victim = 0;
	for (std::size_t i = 0; i < t.node_count(); ++i)
		if (!t.nodes()[i].children.empty())
			victim = i;
	t.overwrite_hash_unchecked(victim, flip(t.nodes()[victim].hash, {0}));
	CHECK_FALSE(t.validate());
}
