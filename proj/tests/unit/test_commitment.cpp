#include "doctest.h"

#include "phreg/commitment.hpp"
#include "phreg/error.hpp"

#include <algorithm>
#include <cctype>
#include <random>
#include <set>

using namespace phreg;

namespace {

Digest random_digest(std::mt19937_64& rng)
{
	Digest d;
	for (auto& b : d)
		b = static_cast<std::uint8_t>(rng());
	return d;
}

Timestamp at(std::int64_t s)
{
	return Timestamp{std::chrono::seconds{s}};
}

} // namespace

TEST_CASE("SHA-256 known answers")
{
	CHECK(to_hex(sha256("")) == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
	CHECK(to_hex(sha256("abc")) == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
	Sha256 h;
	h.update("a").update("bc");
	CHECK(h.finish() == sha256("abc"));
	CHECK(h.update("abc").finish() == sha256("abc")); // finish resets
}

TEST_CASE("digest hex round trip is strict lowercase")
{
	std::mt19937_64 rng(1);
	const Digest d = random_digest(rng);
	CHECK(digest_from_hex(to_hex(d)) == d);
	std::string upper = to_hex(d);
	for (char& c : upper)
		c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
	if (upper != to_hex(d))
		CHECK_FALSE(digest_from_hex(upper).has_value());
	CHECK_FALSE(digest_from_hex("abcd").has_value());
}

TEST_CASE("bucket digests")
{
	CHECK(empty_bucket_digest() == bucket_digest(""));
	CHECK(to_hex(empty_bucket_digest()) == to_hex(sha256("phreg.bucket.v1\n")));
	CHECK(bucket_digest("0 0000000000000000 0 0\n") != bucket_digest("0 0000000000000001 0 0\n"));
}

TEST_CASE("empty trie root is the domain constant")
{
	CommitmentTrie t;
	CHECK(t.root() == sha256("phreg.commitment.empty-trie.v1"));
	CHECK(t.root() == CommitmentTrie::empty_root());
	CHECK(t.leaf_count() == 0);
	CHECK_THROWS_AS(t.prove(PrefixKey{1}), NotFoundError);
}

TEST_CASE("first update moves the root; versions count updates")
{
	std::mt19937_64 rng(2);
	CommitmentTrie t;
	const PrefixKey k{0xA1F3};
	CHECK(t.update(k, random_digest(rng)) == 1);
	CHECK(t.root() != CommitmentTrie::empty_root());
	CHECK(t.update(k, random_digest(rng)) == 2);
	CHECK(t.version(k) == 2);
	CHECK(t.leaf_count() == 1);
}

TEST_CASE("updates to different prefixes commute")
{
	std::mt19937_64 rng(3);
	const Digest a = random_digest(rng), b = random_digest(rng);
	CommitmentTrie x, y;
	x.update(PrefixKey{0x1234}, a);
	x.update(PrefixKey{0x1235}, b);
	y.update(PrefixKey{0x1235}, b);
	y.update(PrefixKey{0x1234}, a);
	CHECK(x.root() == y.root());
}

TEST_CASE("every leaf change moves the root")
{
	std::mt19937_64 rng(4);
	CommitmentTrie t;
	std::set<std::string> roots{to_hex(t.root())};
	for (int i = 0; i < 500; ++i) {
		t.update(PrefixKey{static_cast<std::uint16_t>(rng() % 64)}, random_digest(rng));
		CHECK(roots.insert(to_hex(t.root())).second);
	}
}

TEST_CASE("re-applying an identical leaf keeps the root but still logs a record")
{
	std::mt19937_64 rng(5);
	CommitmentTrie t;
	Ledger ledger;
	const Digest d = random_digest(rng);
	update_commitment(t, ledger, PrefixKey{7}, d, at(100));
	const Digest before = t.root();
	const auto& rec = update_commitment(t, ledger, PrefixKey{7}, d, at(101));
	CHECK(t.root() == before);
	CHECK(ledger.size() == 2);
	CHECK(rec.version == 2);
	CHECK(rec.root == before);
}

TEST_CASE("single-bucket proof has all-absent siblings and verifies")
{
	CommitmentTrie t;
	std::mt19937_64 rng(6);
	const PrefixKey k{0x3B24};
	t.update(k, random_digest(rng));
	const InclusionProof p = t.prove(k);
	CHECK(p.path == std::array<std::uint8_t, 4>{3, 0xB, 2, 4});
	for (const auto& level : p.siblings)
		for (const Digest& d : level)
			CHECK(d == Digest{});
	CHECK(verify_inclusion(p, t.root()));
}

TEST_CASE("proof round trips and mutation failures over many buckets")
{
	std::mt19937_64 rng(7);
	CommitmentTrie t;
	std::vector<PrefixKey> keys;
	for (int i = 0; i < 1000; ++i) {
		keys.emplace_back(static_cast<std::uint16_t>(rng()));
		t.update(keys.back(), random_digest(rng));
	}
	for (int i = 0; i < 200; ++i) {
		const PrefixKey k = keys[rng() % keys.size()];
		const InclusionProof p = t.prove(k);
		REQUIRE(verify_inclusion(p, t.root()));

		InclusionProof bad_sibling = p;
		bad_sibling.siblings[rng() % 4][rng() % 15][rng() % 32] ^= 0x01;
		CHECK_FALSE(verify_inclusion(bad_sibling, t.root()));

		InclusionProof bad_leaf = p;
		bad_leaf.leaf[rng() % 32] ^= 0x80;
		CHECK_FALSE(verify_inclusion(bad_leaf, t.root()));

		Digest other = t.root();
		other[0] ^= 1;
		CHECK_FALSE(verify_inclusion(p, other));

		InclusionProof moved = p; // a valid proof relabelled to a different prefix
		moved.prefix = PrefixKey{static_cast<std::uint16_t>(k.value() ^ 1)};
		CHECK_FALSE(verify_inclusion(moved, t.root()));
	}
}

TEST_CASE("binary and JSON proof forms round trip")
{
	std::mt19937_64 rng(8);
	CommitmentTrie t;
	for (int i = 0; i < 50; ++i)
		t.update(PrefixKey{static_cast<std::uint16_t>(rng())}, random_digest(rng));
	const PrefixKey k = t.leaves()[17].first;
	const InclusionProof p = t.prove(k);

	const auto bytes = p.to_bytes();
	CHECK(bytes.size() == 4 + 2 + 4 + 4 * 15 * 32 + 32 + 32);
	CHECK(InclusionProof::from_bytes(bytes) == p);
	CHECK_FALSE(InclusionProof::from_bytes(std::span(bytes).first(bytes.size() - 1)).has_value());

	const auto j = to_json(p);
	CHECK(j.at("prefix") == k.to_hex());
	CHECK(proof_from_json(j) == p);
	CHECK(proof_from_json(nlohmann::json::parse(j.dump())) == p);
	auto broken = j;
	broken["leaf"] = "zz";
	CHECK_FALSE(proof_from_json(broken).has_value());
	CHECK_FALSE(proof_from_json(nlohmann::json::array()).has_value());
}

TEST_CASE("root is reproducible from the (prefix, digest) leaf set")
{
	std::mt19937_64 rng(9);
	CommitmentTrie t;
	for (int i = 0; i < 300; ++i)
		t.update(PrefixKey{static_cast<std::uint16_t>(rng() % 4096)}, random_digest(rng));
	auto leaves = t.leaves();
	std::shuffle(leaves.begin(), leaves.end(), rng);
	CommitmentTrie rebuilt;
	for (const auto& [k, d] : leaves)
		rebuilt.set_leaf(k, d, 1);
	CHECK(rebuilt.root() == t.root());
}

TEST_CASE("ledger chains digests and round-trips through text")
{
	std::mt19937_64 rng(10);
	Ledger l;
	CHECK(l.head() == Digest{});
	CHECK(l.verify_chain());
	for (int i = 0; i < 20; ++i)
		l.append(at(1'700'000'000 + i), PrefixKey{static_cast<std::uint16_t>(i)}, 1, random_digest(rng));
	CHECK(l.verify_chain());
	CHECK(l.records()[5].sequence == 5);
	CHECK(l.records()[5].record_digest
	      == Ledger::chain_digest(l.records()[4].record_digest, 5, l.records()[5].timestamp, l.records()[5].prefix,
	                              l.records()[5].version, l.records()[5].root));

	std::string text;
	for (const auto& r : l.records())
		text += Ledger::format_record(r) + "\n";
	const Ledger back = Ledger::parse(text);
	CHECK(back.records() == l.records());

	// A torn final line is dropped, not fatal.
	CHECK(Ledger::parse(text + "20 2023-11").size() == 20);
}

TEST_CASE("ledger parse rejects edits to history")
{
	std::mt19937_64 rng(11);
	Ledger l;
	for (int i = 0; i < 5; ++i)
		l.append(at(1'700'000'000 + i), PrefixKey{static_cast<std::uint16_t>(i)}, 1, random_digest(rng));
	std::string text;
	for (const auto& r : l.records())
		text += Ledger::format_record(r) + "\n";

	for (std::size_t pos = 0; pos < text.size(); pos += 7) {
		if (text[pos] == '\n' || text[pos] == ' ')
			continue;
		std::string edited = text;
		edited[pos] = edited[pos] == '0' ? '1' : '0';
		CAPTURE(pos);
		CHECK_THROWS_AS(Ledger::parse(edited), IntegrityError);
	}
}
