#pragma once

#include "phreg/hash.hpp"
#include "phreg/prefix.hpp"
#include "phreg/transforms.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace phreg {

// Uniform random 64-bit hashes; identical for identical (count, seed).
std::vector<PerceptualHash> synth_corpus(std::size_t count, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Threshold sweep

struct SweepInput
{
	std::vector<PerceptualHash> originals; // registered; also queried as positives
	std::vector<PerceptualHash> edited;    // positives
	std::vector<PerceptualHash> negatives; // never registered
};

struct SweepConfig
{
	std::vector<PrefixScheme> schemes{PrefixScheme::Continuous, PrefixScheme::Discontinuous};
	std::vector<int> tolerances{2, 4};
	std::vector<int> taus{2, 6, 10, 15, 20};
};

struct SweepResult
{
	PrefixScheme scheme{PrefixScheme::Discontinuous};
	int flip_tolerance{0};
	int tau{0};
	std::size_t tp{0};
	std::size_t fn{0};
	std::size_t fp{0};
	std::size_t tn{0};

	// NaN when the denominator is zero.
	double recall() const;
	double precision() const;
	double fpr() const;

	bool operator==(const SweepResult&) const = default;
};

// One result per (scheme, tolerance, tau), in that nesting order. A query
// counts as found when its verdict is ExactMatch or PotentialMatch.
// Throws ConfigError when there are no originals, no positive queries, no
// negatives, or an empty parameter list.
std::vector<SweepResult> run_sweep(const SweepInput& input, const SweepConfig& config);

// Builds sweep input from a corpus directory holding originals/ and
// negatives/ image files. `edited_count` variants are made by cycling
// through a seeded shuffle of the originals and applying a random 1-3 step
// edit chain to each.
struct CorpusSweepInput
{
	SweepInput hashes;
	std::vector<std::filesystem::path> original_files;
	std::vector<std::filesystem::path> negative_files;
	// Per edited hash: index of its source original and the chain applied.
	std::vector<std::size_t> edited_source;
	std::vector<std::vector<TransformSpec>> edited_chain;
};

CorpusSweepInput load_corpus_sweep_input(const std::filesystem::path& corpus_dir, std::size_t edited_count,
                                         std::uint64_t seed);

// ---------------------------------------------------------------------------
// Latency benchmark

enum class BenchStructure { FlatArray, BkTreeOnly, TrieBkTree };

std::string_view to_string(BenchStructure s);

enum class QuerySource {
	// Queries drawn from the indexed corpus (every query has an exact hit).
	SampledFromCorpus,
	// Fresh uniform random hashes (nearest neighbour is typically far).
	FreshRandom,
};

struct LatencyConfig
{
	std::vector<std::size_t> sizes{100'000, 500'000, 1'000'000};
	std::size_t query_count{50};
	std::uint64_t seed{20240101};
	PrefixScheme scheme{PrefixScheme::Discontinuous};
	int flip_tolerance{2};
	QuerySource queries{QuerySource::SampledFromCorpus};
};

struct LatencyReport
{
	BenchStructure structure{BenchStructure::FlatArray};
	std::size_t registry_size{0};
	std::size_t query_count{0};
	double avg_ms{0};
	double p95_ms{0};
	// TrieBkTree only: mean entries held by the searched buckets.
	double mean_candidates{0};
	// Queries whose minimum distance disagrees with the flat scan. For
	// TrieBkTree these are all out-of-scope misses; for the others it must
	// be zero.
	std::size_t discrepancies{0};
	// Queries whose minimum disagrees even though the flat-scan minimum lies
	// inside the trie's search scope. Always expected to be zero.
	std::size_t in_scope_discrepancies{0};
};

// p95 as the ceil(0.95 n)-th smallest sample (1-indexed); 0 for no samples.
double percentile95(std::vector<double> samples);

// Sizes must be ascending; indices are grown incrementally so each size is
// the prefix of one seeded corpus of the largest size. Warm-up pass
// excluded, single-threaded, steady clock.
std::vector<LatencyReport> run_latency_bench(const LatencyConfig& config);

// ---------------------------------------------------------------------------
// Output

// "# key=value" header lines followed by a CSV body with a header row.
void write_sweep_csv(std::ostream& out, const std::vector<SweepResult>& results, const std::vector<std::string>& header);
void write_latency_csv(std::ostream& out, const std::vector<LatencyReport>& reports,
                       const std::vector<std::string>& header);
void print_sweep_table(std::ostream& out, const std::vector<SweepResult>& results);
void print_latency_table(std::ostream& out, const std::vector<LatencyReport>& reports);

} // namespace phreg
