#include "phreg/harness.hpp"

#include "phreg/bktree.hpp"
#include "phreg/error.hpp"
#include "phreg/phash.hpp"
#include "phreg/registry.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>
#include <random>

namespace phreg {

std::vector<PerceptualHash> synth_corpus(std::size_t count, std::uint64_t seed)
{
	std::mt19937_64 rng(seed);
	std::vector<PerceptualHash> out;
	out.reserve(count);
	for (std::size_t i = 0; i < count; ++i)
		out.emplace_back(rng());
	return out;
}

// ---------------------------------------------------------------------------
// Sweep

namespace {

double ratio(std::size_t num, std::size_t den)
{
	return den ? static_cast<double>(num) / static_cast<double>(den) : std::numeric_limits<double>::quiet_NaN();
}

Timestamp fixed_epoch()
{
	return Timestamp{std::chrono::seconds{1'700'000'000}};
}

bool found(const Verdict& v)
{
	return v.outcome != Outcome::NonMatch;
}

} // namespace

double SweepResult::recall() const
{
	return ratio(tp, tp + fn);
}

double SweepResult::precision() const
{
	return ratio(tp, tp + fp);
}

double SweepResult::fpr() const
{
	return ratio(fp, fp + tn);
}

std::vector<SweepResult> run_sweep(const SweepInput& input, const SweepConfig& config)
{
	if (input.originals.empty())
		throw ConfigError("sweep needs at least one registered original");
	if (input.negatives.empty())
		throw ConfigError("sweep needs a non-empty negative query set");
	if (config.schemes.empty() || config.tolerances.empty() || config.taus.empty())
		throw ConfigError("sweep parameter lists must be non-empty");

	std::vector<PerceptualHash> positives = input.originals;
	positives.insert(positives.end(), input.edited.begin(), input.edited.end());

	std::vector<SweepResult> results;
	for (PrefixScheme scheme : config.schemes) {
		RegistryConfig rc;
		rc.scheme = scheme;
		Registry registry(rc, fixed_epoch);
		for (PerceptualHash h : input.originals)
			registry.register_hash(h);

		for (int tolerance : config.tolerances) {
			for (int tau : config.taus) {
				const VerifyOptions opts{tau, tolerance};
				SweepResult r{scheme, tolerance, tau};
				for (PerceptualHash q : positives)
					++(found(registry.verify(q, opts)) ? r.tp : r.fn);
				for (PerceptualHash q : input.negatives)
					++(found(registry.verify(q, opts)) ? r.fp : r.tn);
				results.push_back(r);
			}
		}
	}
	return results;
}

namespace {

std::vector<std::filesystem::path> image_files(const std::filesystem::path& dir)
{
	if (!std::filesystem::is_directory(dir))
		throw ConfigError("corpus directory missing: " + dir.string());
	std::vector<std::filesystem::path> out;
	for (const auto& e : std::filesystem::directory_iterator(dir)) {
		const auto ext = e.path().extension().string();
		if (e.is_regular_file() && (ext == ".png" || ext == ".jpg" || ext == ".jpeg"))
			out.push_back(e.path());
	}
	std::sort(out.begin(), out.end());
	return out;
}

} // namespace

CorpusSweepInput load_corpus_sweep_input(const std::filesystem::path& corpus_dir, std::size_t edited_count,
                                         std::uint64_t seed)
{
	CorpusSweepInput in;
	in.original_files = image_files(corpus_dir / "originals");
	in.negative_files = image_files(corpus_dir / "negatives");
	if (in.original_files.empty() || in.negative_files.empty())
		throw ConfigError("corpus at " + corpus_dir.string() + " has no originals or no negatives");

	std::vector<RgbImage> originals;
	originals.reserve(in.original_files.size());
	for (const auto& f : in.original_files) {
		originals.push_back(load_image(f));
		in.hashes.originals.push_back(compute_phash(originals.back()));
	}
	for (const auto& f : in.negative_files)
		in.hashes.negatives.push_back(compute_phash_file(f));

	std::mt19937_64 rng(seed);
	std::vector<std::size_t> order(originals.size());
	std::iota(order.begin(), order.end(), std::size_t{0});
	std::shuffle(order.begin(), order.end(), rng);
	for (std::size_t i = 0; i < edited_count; ++i) {
		const std::size_t src = order[i % order.size()];
		auto chain = random_edit_chain(rng);
		in.hashes.edited.push_back(compute_phash(apply_chain(originals[src], chain)));
		in.edited_source.push_back(src);
		in.edited_chain.push_back(std::move(chain));
	}
	return in;
}

// ---------------------------------------------------------------------------
// Latency

std::string_view to_string(BenchStructure s)
{
	switch (s) {
	case BenchStructure::FlatArray:
		return "FlatArray";
	case BenchStructure::BkTreeOnly:
		return "BkTreeOnly";
	case BenchStructure::TrieBkTree:
		return "TrieBkTree";
	}
	return "?";
}

double percentile95(std::vector<double> samples)
{
	if (samples.empty())
		return 0;
	std::sort(samples.begin(), samples.end());
	const auto rank = static_cast<std::size_t>(std::ceil(0.95 * static_cast<double>(samples.size())));
	return samples[std::max<std::size_t>(rank, 1) - 1];
}

namespace {

using BenchClock = std::chrono::steady_clock;

// Minimum distance by linear scan; ties resolve to the lowest index.
int flat_min(const std::vector<PerceptualHash>& data, std::size_t n, PerceptualHash q)
{
	int best = hash_bits + 1;
	for (std::size_t i = 0; i < n; ++i) {
		const int d = hamming_distance(data[i], q);
		if (d < best) {
			best = d;
			if (d == 0)
				break;
		}
	}
	return best;
}

template <typename Fn>
LatencyReport time_queries(BenchStructure s, std::size_t n, const std::vector<PerceptualHash>& queries, Fn&& fn)
{
	for (PerceptualHash q : queries) // warm-up, not recorded
		fn(q);
	std::vector<double> ms;
	ms.reserve(queries.size());
	for (PerceptualHash q : queries) {
		const auto t0 = BenchClock::now();
		fn(q);
		const auto t1 = BenchClock::now();
		ms.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
	}
	LatencyReport r;
	r.structure = s;
	r.registry_size = n;
	r.query_count = queries.size();
	r.avg_ms = ms.empty() ? 0 : std::accumulate(ms.begin(), ms.end(), 0.0) / static_cast<double>(ms.size());
	r.p95_ms = percentile95(ms);
	return r;
}

// Volatile sink so the optimiser cannot drop timed work.
volatile int g_sink = 0;

} // namespace

std::vector<LatencyReport> run_latency_bench(const LatencyConfig& config)
{
	if (config.sizes.empty() || !std::is_sorted(config.sizes.begin(), config.sizes.end()))
		throw ConfigError("bench sizes must be non-empty and ascending");
	if (config.query_count == 0)
		throw ConfigError("bench needs at least one query");

	const std::size_t max_n = config.sizes.back();
	const auto corpus = synth_corpus(max_n, config.seed);

	RegistryConfig rc;
	rc.scheme = config.scheme;
	rc.flip_tolerance = config.flip_tolerance;
	Registry registry(rc, fixed_epoch);
	BkTree tree;
	std::size_t built = 0;

	std::vector<LatencyReport> out;
	for (std::size_t n : config.sizes) {
		for (; built < n; ++built) {
			tree.insert(corpus[built], built);
			registry.register_hash(corpus[built]);
		}

		std::mt19937_64 qrng(config.seed ^ (0x9E3779B97F4A7C15ull * (n + 1)));
		std::vector<PerceptualHash> queries;
		for (std::size_t i = 0; i < config.query_count; ++i) {
			if (config.queries == QuerySource::SampledFromCorpus && n > 0)
				queries.push_back(corpus[qrng() % n]);
			else
				queries.emplace_back(qrng());
		}

		// Ground truth and structure equivalence, outside the timed region.
		std::size_t bk_mismatch = 0, trie_mismatch = 0, trie_in_scope = 0;
		double candidates = 0;
		for (PerceptualHash q : queries) {
			const int truth = flat_min(corpus, n, q);
			const auto bk = tree.search_best(q, hash_bits);
			if (!bk || bk->distance != truth)
				++bk_mismatch;
			const Verdict v = registry.verify(q);
			candidates += static_cast<double>(v.candidates_checked);
			if (v.min_distance == truth)
				continue;
			++trie_mismatch;
			const PrefixKey qp = extract_prefix(q, config.scheme);
			for (std::size_t i = 0; i < n; ++i) {
				if (hamming_distance(corpus[i], q) != truth)
					continue;
				const auto pd = std::popcount(static_cast<unsigned>(extract_prefix(corpus[i], config.scheme).value() ^ qp.value()));
				if (pd <= config.flip_tolerance) {
					++trie_in_scope;
					break;
				}
			}
		}

		auto flat = time_queries(BenchStructure::FlatArray, n, queries, [&](PerceptualHash q) { g_sink = flat_min(corpus, n, q); });
		auto bk = time_queries(BenchStructure::BkTreeOnly, n, queries, [&](PerceptualHash q) {
			const auto m = tree.search_best(q, hash_bits);
			g_sink = m ? m->distance : -1;
		});
		bk.discrepancies = bk_mismatch;
		bk.in_scope_discrepancies = bk_mismatch;
		auto trie = time_queries(BenchStructure::TrieBkTree, n, queries, [&](PerceptualHash q) {
			g_sink = registry.verify(q).min_distance.value_or(-1);
		});
		trie.mean_candidates = candidates / static_cast<double>(queries.size());
		trie.discrepancies = trie_mismatch;
		trie.in_scope_discrepancies = trie_in_scope;

		out.push_back(flat);
		out.push_back(bk);
		out.push_back(trie);
	}
	return out;
}

// ---------------------------------------------------------------------------
// Output

namespace {

std::string fmt(double v, int prec = 6)
{
	if (std::isnan(v))
		return "nan";
	char buf[64];
	std::snprintf(buf, sizeof buf, "%.*f", prec, v);
	return buf;
}

void write_header(std::ostream& out, const std::vector<std::string>& header)
{
	for (const auto& line : header)
		out << "# " << line << '\n';
}

} // namespace

void write_sweep_csv(std::ostream& out, const std::vector<SweepResult>& results, const std::vector<std::string>& header)
{
	write_header(out, header);
	out << "scheme,flip_tolerance,tau,tp,fn,fp,tn,recall,precision,fpr\n";
	for (const auto& r : results)
		out << to_string(r.scheme) << ',' << r.flip_tolerance << ',' << r.tau << ',' << r.tp << ',' << r.fn << ','
		    << r.fp << ',' << r.tn << ',' << fmt(r.recall()) << ',' << fmt(r.precision()) << ',' << fmt(r.fpr()) << '\n';
}

void write_latency_csv(std::ostream& out, const std::vector<LatencyReport>& reports,
                       const std::vector<std::string>& header)
{
	write_header(out, header);
	out << "structure,registry_size,query_count,avg_ms,p95_ms,mean_candidates,discrepancies,in_scope_discrepancies\n";
	for (const auto& r : reports)
		out << to_string(r.structure) << ',' << r.registry_size << ',' << r.query_count << ',' << fmt(r.avg_ms) << ','
		    << fmt(r.p95_ms) << ',' << fmt(r.mean_candidates, 2) << ',' << r.discrepancies << ','
		    << r.in_scope_discrepancies << '\n';
}

void print_sweep_table(std::ostream& out, const std::vector<SweepResult>& results)
{
	char line[160];
	std::snprintf(line, sizeof line, "%-14s %4s %4s %6s %6s %6s %6s %8s %9s %8s\n", "scheme", "tol", "tau", "TP", "FN",
	              "FP", "TN", "recall", "precision", "FPR");
	out << line;
	for (const auto& r : results) {
		std::snprintf(line, sizeof line, "%-14s %4d %4d %6zu %6zu %6zu %6zu %8s %9s %8s\n",
		              std::string(to_string(r.scheme)).c_str(), r.flip_tolerance, r.tau, r.tp, r.fn, r.fp, r.tn,
		              fmt(r.recall(), 4).c_str(), fmt(r.precision(), 4).c_str(), fmt(r.fpr(), 4).c_str());
		out << line;
	}
}

void print_latency_table(std::ostream& out, const std::vector<LatencyReport>& reports)
{
	char line[160];
	std::snprintf(line, sizeof line, "%-11s %9s %7s %12s %12s %10s %6s\n", "structure", "size", "queries", "avg (ms)",
	              "p95 (ms)", "candidates", "diffs");
	out << line;
	for (const auto& r : reports) {
		std::snprintf(line, sizeof line, "%-11s %9zu %7zu %12.4f %12.4f %10s %6zu\n",
		              std::string(to_string(r.structure)).c_str(), r.registry_size, r.query_count, r.avg_ms, r.p95_ms,
		              r.structure == BenchStructure::TrieBkTree ? fmt(r.mean_candidates, 1).c_str() : "-",
		              r.discrepancies);
		out << line;
	}
}

} // namespace phreg
