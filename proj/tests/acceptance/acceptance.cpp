// Acceptance suite. Each criterion prints one PASS/FAIL line; the process exits
// nonzero when any criterion fails.

#include "phreg/bktree.hpp"
#include "phreg/error.hpp"
#include "phreg/harness.hpp"
#include "phreg/registry.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>

using namespace phreg;
namespace fs = std::filesystem;

namespace {

const fs::path data_dir{PHREG_TEST_DATA};

struct Check
{
	bool pass;
	std::string detail;
};

Timestamp fixed_now()
{
	return Timestamp{std::chrono::seconds{1'700'000'000}};
}

struct TempDir
{
	fs::path path;
	explicit TempDir(const std::string& name)
		: path{fs::temp_directory_path() / ("phreg-accept-" + name + "-" + std::to_string(std::random_device{}()))}
	{
		fs::remove_all(path);
	}
	~TempDir() { fs::remove_all(path); }
};

std::string read(const fs::path& p)
{
	std::ifstream in(p, std::ios::binary);
	return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write(const fs::path& p, const std::string& s)
{
	std::ofstream(p, std::ios::binary | std::ios::trunc) << s;
}

std::vector<PerceptualHash> fill(Registry& r, std::size_t n, std::uint64_t seed)
{
	std::vector<PerceptualHash> out = synth_corpus(n, seed);
	for (std::size_t i = 0; i < out.size(); ++i)
		r.register_hash(out[i], EntryMetadata{std::nullopt, "p" + std::to_string(i % 5), {}});
	return out;
}

// Half uniform, half near a stored hash so small distances actually occur.
PerceptualHash mixed_query(std::mt19937_64& rng, const std::vector<PerceptualHash>& stored, int i)
{
	if (i % 2 == 0)
		return PerceptualHash{rng()};
	return PerceptualHash{stored[rng() % stored.size()].bits() ^ (rng() & rng() & rng() & rng())};
}

std::string fmt(const char* f, auto... args)
{
	char buf[256];
	std::snprintf(buf, sizeof buf, f, args...);
	return buf;
}

// ---------------------------------------------------------------------------

Check similarity_golden()
{
	const std::string a = similarity_score(2).to_string(), b = similarity_score(5).to_string(),
	                  c = similarity_score(0).to_string();
	return {a == "96.88" && b == "92.19" && c == "100.00", "d=2 -> " + a + ", d=5 -> " + b + ", d=0 -> " + c};
}

Check neighbor_counts()
{
	bool ok = true;
	std::string detail;
	std::mt19937_64 rng(2);
	for (int t : {1, 2, 4}) {
		for (int trial = 0; trial < 8; ++trial) {
			const PrefixKey k{static_cast<std::uint16_t>(rng())};
			const auto got = enumerate_neighbors(k, t);
			std::set<std::uint16_t> seen;
			for (PrefixKey p : got)
				seen.insert(p.value());
			std::size_t scan = 0;
			for (std::uint32_t v = 0; v < 65536; ++v) {
				const bool inside = std::popcount(static_cast<unsigned>(v ^ k.value())) <= t;
				scan += inside;
				if (inside != seen.contains(static_cast<std::uint16_t>(v)))
					ok = false;
			}
			ok = ok && seen.size() == got.size() && got.size() == scan;
		}
		const std::size_t expected = t == 1 ? 17 : t == 2 ? 137 : 2517;
		ok = ok && neighbor_count(t) == expected;
		detail += fmt("t=%d -> %zu  ", t, neighbor_count(t));
	}
	return {ok, detail + "(exhaustive scan agrees)"};
}

Check bktree_oracle()
{
	std::size_t discrepancies = 0, checks = 0;
	for (int instance = 0; instance < 20; ++instance) {
		const auto data = synth_corpus(10'000, 300 + static_cast<std::uint64_t>(instance));
		BkTree tree;
		for (std::size_t i = 0; i < data.size(); ++i)
			tree.insert(data[i], i);
		std::mt19937_64 rng(400 + static_cast<std::uint64_t>(instance));
		std::vector<int> dist(data.size());
		for (int q = 0; q < 100; ++q) {
			const PerceptualHash query = mixed_query(rng, data, q);
			for (std::size_t i = 0; i < data.size(); ++i)
				dist[i] = hamming_distance(data[i], query);
			for (int radius = 0; radius <= 12; ++radius) {
				std::vector<std::pair<EntryId, int>> oracle, got;
				for (std::size_t i = 0; i < data.size(); ++i)
					if (dist[i] <= radius)
						oracle.emplace_back(i, dist[i]);
				for (const auto& m : tree.search_radius(query, radius)) {
					got.emplace_back(m.payload, m.distance);
					if (m.hash != data[m.payload])
						++discrepancies;
				}
				std::sort(got.begin(), got.end());
				++checks;
				discrepancies += got != oracle;
			}
		}
	}
	return {discrepancies == 0, fmt("%zu discrepancies over %zu (instance, query, radius) checks", discrepancies, checks)};
}

Check search_scope()
{
	std::size_t discrepancies = 0, checks = 0;
	for (PrefixScheme scheme : {PrefixScheme::Continuous, PrefixScheme::Discontinuous}) {
		Registry reg({scheme, 2, 6}, fixed_now);
		const auto data = fill(reg, 10'000, 500 + static_cast<std::uint64_t>(scheme));
		std::vector<std::uint16_t> keys;
		for (const auto& h : data)
			keys.push_back(extract_prefix(h, scheme).value());
		for (int tol : {2, 4}) {
			std::mt19937_64 rng(600 + static_cast<std::uint64_t>(tol));
			for (int q = 0; q < 1000; ++q) {
				const PerceptualHash query = mixed_query(rng, data, q);
				const std::uint16_t qk = extract_prefix(query, scheme).value();
				std::optional<int> best;
				for (std::size_t i = 0; i < data.size(); ++i)
					if (std::popcount(static_cast<unsigned>(keys[i] ^ qk)) <= tol) {
						const int d = hamming_distance(data[i], query);
						best = best ? std::min(*best, d) : d;
					}
				const Verdict v = reg.verify(query, VerifyOptions{std::nullopt, tol});
				++checks;
				discrepancies += v.min_distance != best;
			}
		}
	}
	return {discrepancies == 0, fmt("%zu discrepancies over %zu (scheme, tolerance, query) checks", discrepancies, checks)};
}

Check occupancy_and_candidates(Registry& big)
{
	const double mean = big.stats().mean_occupancy();
	std::mt19937_64 rng(700);
	double total = 0;
	const int queries = 1000;
	for (int q = 0; q < queries; ++q)
		total += static_cast<double>(big.verify(PerceptualHash{rng()}, VerifyOptions{std::nullopt, 2}).candidates_checked);
	const double candidates = total / queries;
	const bool ok = std::abs(mean - 15.26) <= 0.05 * 15.26 && std::abs(candidates - 2055) <= 0.10 * 2055;
	return {ok, fmt("mean occupancy %.3f (target 15.26 +/-5%%), mean candidates %.1f over %d fresh queries "
	                "(target 2055 +/-10%%)",
	                mean, candidates, queries)};
}

Check latency_ordering()
{
	LatencyConfig cfg;
	cfg.sizes = {1'000'000};
	cfg.query_count = 50;
	const auto reports = run_latency_bench(cfg);
	double flat = 0, bk = 0, trie = 0;
	std::size_t in_scope = 0;
	for (const auto& r : reports) {
		in_scope += r.in_scope_discrepancies;
		(r.structure == BenchStructure::FlatArray ? flat : r.structure == BenchStructure::BkTreeOnly ? bk : trie) = r.avg_ms;
	}
	const bool ok = trie < flat && trie < bk && trie <= flat / 10 && in_scope == 0;
	return {ok, fmt("avg ms at 1M, 50 sampled queries: flat %.4f, bk-only %.4f, trie+bk %.4f (flat/trie %.0fx)", flat,
	                bk, trie, flat / trie)};
}

Check tamper_evidence()
{
	TempDir dir("tamper");
	Registry reg({}, fixed_now);
	const auto data = fill(reg, 10'000, 800);
	reg.save(dir.path);
	std::mt19937_64 rng(801);
	int detected = 0;
	const int trials = 50;
	for (int t = 0; t < trials; ++t) {
		const std::size_t victim = rng() % data.size();
		const fs::path file =
			dir.path / "buckets" / (extract_prefix(data[victim], reg.config().scheme).to_hex() + ".bkt");
		const std::string original = read(file);
		const std::string hex = data[victim].to_hex();
		const int bit = static_cast<int>(rng() % 64);
		const std::string flipped = PerceptualHash{data[victim].bits() ^ (std::uint64_t{1} << bit)}.to_hex();

		// Alternate between the index copy and the entry record of the hash.
		const auto first = original.find(hex);
		const auto pos = t % 2 ? original.find(hex, first + 1) : first;
		if (pos == std::string::npos)
			continue; // counted as undetected
		std::string edited = original;
		edited.replace(pos, hex.size(), flipped);
		write(file, edited);
		try {
			Registry::restore(dir.path, fixed_now);
		} catch (const IntegrityError&) {
			++detected;
		}
		write(file, original);
	}
	bool clean_ok = true;
	try {
		clean_ok = Registry::restore(dir.path, fixed_now).root() == reg.root();
	} catch (const Error&) {
		clean_ok = false;
	}
	return {detected == trials && clean_ok,
	        fmt("%d/%d single-bit hash flips rejected; untouched snapshot restores: %s", detected, trials,
	            clean_ok ? "yes" : "no")};
}

Check sweep_shape()
{
	const auto in = load_corpus_sweep_input(data_dir / "corpus", 360, 11);
	const auto results = run_sweep(in.hashes, SweepConfig{});
	bool ok = in.hashes.originals.size() >= 100 && in.hashes.edited.size() >= 300 && in.hashes.negatives.size() >= 100;
	std::string detail = fmt("%zu originals, %zu edited, %zu negatives; ", in.hashes.originals.size(),
	                         in.hashes.edited.size(), in.hashes.negatives.size());
	// Results come grouped per (scheme, tolerance) with taus {2,6,10,15,20}.
	for (std::size_t g = 0; g + 5 <= results.size(); g += 5) {
		for (std::size_t i = 1; i < 5; ++i)
			ok = ok && results[g + i].recall() >= results[g + i - 1].recall()
			     && results[g + i].fpr() >= results[g + i - 1].fpr();
		ok = ok && results[g + 1].recall() > results[g].recall() && results[g + 4].fpr() > results[g + 1].fpr();
		detail += fmt("%s/t%d recall %.3f->%.3f fpr(6->20) %.3f->%.3f; ",
		              std::string(to_string(results[g].scheme)).c_str(), results[g].flip_tolerance, results[g].recall(),
		              results[g + 1].recall(), results[g + 1].fpr(), results[g + 4].fpr());
	}
	return {ok && results.size() == 20, detail};
}

Check persistence_round_trip()
{
	TempDir dir("persist");
	Registry reg({}, fixed_now);
	const auto data = fill(reg, 10'000, 900);
	reg.save(dir.path);
	const Registry back = Registry::restore(dir.path, fixed_now);
	const bool root_ok = back.root() == reg.root();
	std::mt19937_64 rng(901);
	int same = 0;
	for (int q = 0; q < 100; ++q) {
		const PerceptualHash query = mixed_query(rng, data, q);
		same += to_json(back.verify(query)).dump() == to_json(reg.verify(query)).dump();
	}
	return {root_ok && same == 100, fmt("root identical: %s; %d/100 verdicts identical", root_ok ? "yes" : "no", same)};
}

Check proofs()
{
	Registry reg({}, fixed_now);
	const auto data = fill(reg, 10'000, 1000);
	const Digest root = reg.root();
	std::mt19937_64 rng(1001);
	int verified = 0;
	for (int i = 0; i < 1000; ++i) {
		const InclusionProof p = reg.prove(extract_prefix(data[rng() % data.size()], reg.config().scheme));
		const auto bytes = p.to_bytes();
		const auto parsed = InclusionProof::from_bytes(bytes);
		verified += parsed && *parsed == p && verify_inclusion(*parsed, root);
	}
	int rejected = 0;
	for (int i = 0; i < 100; ++i) {
		auto bytes = reg.prove(extract_prefix(data[rng() % data.size()], reg.config().scheme)).to_bytes();
		bytes[rng() % bytes.size()] ^= static_cast<std::uint8_t>(1 + rng() % 255);
		const auto parsed = InclusionProof::from_bytes(bytes);
		rejected += !parsed || !verify_inclusion(*parsed, root);
	}
	return {verified == 1000 && rejected == 100,
	        fmt("%d/1000 round trips verified; %d/100 corrupted proofs rejected", verified, rejected)};
}

} // namespace

int main()
{
	int failed = 0;
	auto run = [&](int id, const char* name, const std::function<Check()>& body) {
		const auto start = std::chrono::steady_clock::now();
		Check o;
		try {
			o = body();
		} catch (const std::exception& e) {
			o = {false, std::string("exception: ") + e.what()};
		}
		const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
		std::printf("[%s] %2d %-32s %s (%.1fs)\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str(), secs);
		std::fflush(stdout);
		failed += !o.pass;
	};

	run(1, "similarity golden values", similarity_golden);
	run(2, "neighbor enumeration counts", neighbor_counts);
	run(3, "bk-tree oracle equivalence", bktree_oracle);
	run(4, "search-scope correctness", search_scope);
	{
		Registry big({}, fixed_now);
		run(5, "bucket occupancy / candidates", [&] {
			fill(big, 1'000'000, 42);
			return occupancy_and_candidates(big);
		});
	}
	run(6, "latency ordering at 1M", latency_ordering);
	run(7, "tamper evidence", tamper_evidence);
	run(8, "sweep monotonicity and shape", sweep_shape);
	run(9, "persistence round trip", persistence_round_trip);
	run(10, "commitment proofs", proofs);

	std::printf("%d of 10 criteria failed\n", failed);
	return failed == 0 ? 0 : 1;
}
