#include "phreg/cli.hpp"

#include "phreg/error.hpp"
#include "phreg/harness.hpp"
#include "phreg/phash.hpp"
#include "phreg/registry.hpp"
#include "phreg/service.hpp"

#include "CLI11.hpp"

#include <csignal>
#include <fstream>
#include <memory>
#include <ostream>
#include <sstream>

namespace phreg {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Options
{
	std::string registry_dir{"phreg-registry"};
	std::string scheme;
	std::string format{"table"};
	bool create{false};

	std::string target;
	std::string platform;
	std::string timestamp;
	std::vector<std::string> meta;
	std::optional<int> tau;
	std::optional<int> tolerance;
	std::string prefix;
	std::string proof_out;
	std::string proof_file;
	std::string root_hex;

	std::vector<std::size_t> sizes{100'000, 500'000, 1'000'000};
	std::size_t queries{50};
	std::uint64_t seed{20240101};
	bool fresh{false};
	std::string csv;
	std::string corpus;
	std::size_t edited{300};
	std::vector<int> taus{2, 6, 10, 15, 20};
	std::vector<int> tolerances{2, 4};

	std::string input;
	std::string output;
	std::string kind;
	double magnitude{0};

	std::string host{"127.0.0.1"};
	int port{8080};
};

// Flattens nested objects/arrays into "a.b.c  value" lines.
void flatten(const json& j, const std::string& key, std::vector<std::pair<std::string, std::string>>& rows)
{
	if (j.is_object()) {
		for (const auto& [k, v] : j.items())
			flatten(v, key.empty() ? k : key + "." + k, rows);
	} else if (j.is_array()) {
		for (std::size_t i = 0; i < j.size(); ++i)
			flatten(j[i], key + "[" + std::to_string(i) + "]", rows);
	} else if (j.is_string()) {
		rows.emplace_back(key, j.get<std::string>());
	} else {
		rows.emplace_back(key, j.is_null() ? "-" : j.dump());
	}
}

void emit(std::ostream& out, const Options& o, const json& j)
{
	if (o.format == "json") {
		out << j.dump(2) << '\n';
		return;
	}
	std::vector<std::pair<std::string, std::string>> rows;
	flatten(j, "", rows);
	std::size_t width = 0;
	for (const auto& r : rows)
		width = std::max(width, r.first.size());
	for (const auto& [k, v] : rows)
		out << k << std::string(width - k.size() + 2, ' ') << v << '\n';
}

json verdict_json(const Verdict& v, const Options& o)
{
	json j = to_json(v);
	// Tables show the score at its fixed two-decimal precision.
	if (o.format != "json" && v.similarity)
		j["similarity"] = v.similarity->to_string();
	return j;
}

// An existing file is an image; otherwise the argument must be hash hex.
PerceptualHash resolve_target(const std::string& target)
{
	if (fs::is_regular_file(target))
		return compute_phash_file(target);
	if (auto h = PerceptualHash::from_hex(target))
		return *h;
	throw InvalidInputError("'" + target + "' is neither an image file nor a 16-digit hex hash");
}

RegistryConfig config_from_options(const Options& o)
{
	RegistryConfig c;
	if (!o.scheme.empty())
		c.scheme = parse_prefix_scheme(o.scheme);
	if (o.tolerance)
		c.flip_tolerance = *o.tolerance;
	if (o.tau)
		c.tau = *o.tau;
	c.validate();
	return c;
}

bool registry_exists(const Options& o)
{
	return fs::exists(fs::path(o.registry_dir) / "registry.json");
}

Registry open_registry(const Options& o)
{
	if (!registry_exists(o)) {
		if (!o.create)
			throw NotFoundError("no registry at '" + o.registry_dir + "' (run `phreg init` or pass --create)");
		// Query-time --tau/--tolerance are not creation settings here.
		RegistryConfig config;
		if (!o.scheme.empty())
			config.scheme = parse_prefix_scheme(o.scheme);
		Registry::init(o.registry_dir, config);
	}
	Registry reg = Registry::restore(o.registry_dir);
	if (!o.scheme.empty() && parse_prefix_scheme(o.scheme) != reg.config().scheme)
		throw ConfigError("registry uses the " + std::string(to_string(reg.config().scheme)) + " scheme, not "
		                  + o.scheme);
	return reg;
}

std::vector<std::string> echo_header(const std::string& what, const std::vector<std::pair<std::string, std::string>>& kv)
{
	std::vector<std::string> out{"phreg " + what};
	for (const auto& [k, v] : kv)
		out.push_back(k + "=" + v);
	return out;
}

template <typename T>
std::string join(const std::vector<T>& v)
{
	std::string s;
	for (std::size_t i = 0; i < v.size(); ++i)
		s += (i ? "," : "") + std::to_string(v[i]);
	return s;
}

RegistryService* g_running_service = nullptr;

extern "C" void stop_service(int)
{
	if (g_running_service)
		g_running_service->stop();
}

int run_command(CLI::App& app, const Options& o, std::ostream& out, std::ostream& err)
{
	const std::string cmd = app.get_subcommands().front()->get_name();

	if (cmd == "init") {
		const RegistryConfig config = config_from_options(o);
		Registry::init(o.registry_dir, config);
		emit(out, o, json{{"registry", o.registry_dir}, {"config", to_json(config)}, {"root", to_hex(CommitmentTrie::empty_root())}});
		return exit_ok;
	}
	if (cmd == "hash") {
		if (!fs::is_regular_file(o.target))
			throw InvalidInputError("no such image file: " + o.target);
		const PerceptualHash h = compute_phash_file(o.target);
		if (o.format == "json")
			emit(out, o, json{{"hash", h.to_hex()}});
		else
			out << h.to_hex() << '\n';
		return exit_ok;
	}
	if (cmd == "register") {
		Registry reg = open_registry(o);
		EntryMetadata meta;
		meta.platform_id = o.platform;
		if (!o.timestamp.empty()) {
			meta.created_at = parse_iso8601(o.timestamp);
			if (!meta.created_at)
				throw InvalidInputError("timestamp must look like 2024-01-31T12:00:00Z, got '" + o.timestamp + "'");
		}
		for (const auto& kv : o.meta) {
			const auto eq = kv.find('=');
			if (eq == std::string::npos || eq == 0)
				throw InvalidInputError("--meta expects key=value, got '" + kv + "'");
			meta.extra[kv.substr(0, eq)] = kv.substr(eq + 1);
		}
		const RegistryEntry e = reg.register_hash(resolve_target(o.target), std::move(meta));
		reg.save(o.registry_dir);
		emit(out, o, to_json(e));
		return exit_ok;
	}
	if (cmd == "verify") {
		const PerceptualHash q = resolve_target(o.target);
		const Registry reg = open_registry(o);
		emit(out, o, verdict_json(reg.verify(q, VerifyOptions{o.tau, o.tolerance}), o));
		return exit_ok;
	}
	if (cmd == "stats") {
		emit(out, o, to_json(open_registry(o).stats()));
		return exit_ok;
	}
	if (cmd == "root") {
		const Registry reg = open_registry(o);
		const auto records = reg.ledger_records();
		emit(out, o,
		     json{{"root", to_hex(reg.root())},
		          {"entries", reg.size()},
		          {"ledger_head", records.empty() ? std::string(64, '0') : to_hex(records.back().record_digest)}});
		return exit_ok;
	}
	if (cmd == "proof") {
		const auto key = PrefixKey::from_hex(o.prefix);
		if (!key)
			throw InvalidInputError("prefix must be 4 hex digits, got '" + o.prefix + "'");
		const InclusionProof p = open_registry(o).prove(*key);
		if (!o.proof_out.empty()) {
			const auto bytes = p.to_bytes();
			std::ofstream f(o.proof_out, std::ios::binary);
			f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
			if (!f)
				throw StorageError("cannot write " + o.proof_out);
		}
		emit(out, o, to_json(p));
		return exit_ok;
	}
	if (cmd == "check-proof") {
		std::ifstream f(o.proof_file, std::ios::binary);
		if (!f)
			throw NotFoundError("cannot open " + o.proof_file);
		const std::string text((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
		std::optional<InclusionProof> p;
		if (text.starts_with("PIP1"))
			p = InclusionProof::from_bytes({reinterpret_cast<const std::uint8_t*>(text.data()), text.size()});
		else
			p = proof_from_json(json::parse(text, nullptr, false));
		if (!p)
			throw InvalidInputError("malformed proof in " + o.proof_file);
		Digest root;
		if (!o.root_hex.empty()) {
			const auto r = digest_from_hex(o.root_hex);
			if (!r)
				throw InvalidInputError("root must be 64 lowercase hex digits");
			root = *r;
		} else {
			root = open_registry(o).root();
		}
		const bool ok = verify_inclusion(*p, root);
		emit(out, o, json{{"valid", ok}, {"prefix", p->prefix.to_hex()}, {"root", to_hex(root)}});
		return ok ? exit_ok : exit_storage;
	}
	if (cmd == "audit") {
		const Registry reg = open_registry(o);
		const bool ok = reg.audit();
		emit(out, o, json{{"consistent", ok}, {"entries", reg.size()}, {"root", to_hex(reg.root())}});
		return ok ? exit_ok : exit_storage;
	}
	if (cmd == "bench") {
		LatencyConfig lc;
		lc.sizes = o.sizes;
		lc.query_count = o.queries;
		lc.seed = o.seed;
		if (!o.scheme.empty())
			lc.scheme = parse_prefix_scheme(o.scheme);
		if (o.tolerance)
			lc.flip_tolerance = *o.tolerance;
		lc.queries = o.fresh ? QuerySource::FreshRandom : QuerySource::SampledFromCorpus;
		const auto reports = run_latency_bench(lc);
		const auto header = echo_header("bench", {{"seed", std::to_string(lc.seed)},
		                                          {"sizes", join(lc.sizes)},
		                                          {"queries", std::to_string(lc.query_count)},
		                                          {"query_source", o.fresh ? "fresh" : "sampled"},
		                                          {"scheme", std::string(to_string(lc.scheme))},
		                                          {"flip_tolerance", std::to_string(lc.flip_tolerance)},
		                                          {"time_unit", "ms"}});
		if (!o.csv.empty()) {
			std::ofstream f(o.csv);
			write_latency_csv(f, reports, header);
			if (!f)
				throw StorageError("cannot write " + o.csv);
		}
		if (o.format == "json") {
			write_latency_csv(out, reports, header);
		} else {
			for (const auto& h : header)
				out << "# " << h << '\n';
			print_latency_table(out, reports);
		}
		return exit_ok;
	}
	if (cmd == "sweep") {
		const auto in = load_corpus_sweep_input(o.corpus, o.edited, o.seed);
		SweepConfig sc;
		sc.taus = o.taus;
		sc.tolerances = o.tolerances;
		if (!o.scheme.empty())
			sc.schemes = {parse_prefix_scheme(o.scheme)};
		const auto results = run_sweep(in.hashes, sc);
		const auto header = echo_header("sweep", {{"seed", std::to_string(o.seed)},
		                                          {"corpus", o.corpus},
		                                          {"originals", std::to_string(in.hashes.originals.size())},
		                                          {"edited", std::to_string(in.hashes.edited.size())},
		                                          {"negatives", std::to_string(in.hashes.negatives.size())},
		                                          {"taus", join(sc.taus)},
		                                          {"tolerances", join(sc.tolerances)}});
		if (!o.csv.empty()) {
			std::ofstream f(o.csv);
			write_sweep_csv(f, results, header);
			if (!f)
				throw StorageError("cannot write " + o.csv);
		}
		if (o.format == "json") {
			write_sweep_csv(out, results, header);
		} else {
			for (const auto& h : header)
				out << "# " << h << '\n';
			print_sweep_table(out, results);
		}
		return exit_ok;
	}
	if (cmd == "transform") {
		const auto kind = parse_transform_kind(o.kind);
		if (!kind)
			throw ConfigError("unknown transform kind '" + o.kind + "'");
		if (!fs::is_regular_file(o.input))
			throw InvalidInputError("no such image file: " + o.input);
		const RgbImage img = apply_transform(load_image(o.input), TransformSpec{*kind, o.magnitude, o.seed});
		save_image(o.output, img);
		emit(out, o, json{{"output", o.output}, {"hash", compute_phash(img).to_hex()}});
		return exit_ok;
	}
	if (cmd == "serve") {
		Registry reg = open_registry(o);
		RegistryService service(reg, fs::path(o.registry_dir));
		const int port = service.bind(o.host, o.port);
		err << "phreg: serving " << o.registry_dir << " on http://" << o.host << ':' << port << '\n';
		g_running_service = &service;
		std::signal(SIGINT, stop_service);
		std::signal(SIGTERM, stop_service);
		service.listen();
		g_running_service = nullptr;
		return exit_ok;
	}
	err << app.help();
	return exit_usage;
}

} // namespace

int cli_dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
	Options o;
	CLI::App app{"Perceptual-hash provenance registry", "phreg"};
	app.require_subcommand(1);
	app.add_option("--registry", o.registry_dir, "Registry snapshot directory")->capture_default_str();
	app.add_option("--scheme", o.scheme, "Prefix scheme: continuous | discontinuous");
	app.add_option("--format", o.format, "Output format")->check(CLI::IsMember({"json", "table"}))->capture_default_str();
	app.add_flag("--create", o.create, "Create the registry if it does not exist");

	auto* init = app.add_subcommand("init", "Create an empty registry");
	init->add_option("--tolerance", o.tolerance, "Prefix bit-flip tolerance (0-4)");
	init->add_option("--tau", o.tau, "Hamming distance threshold (0-64)");

	auto* hash = app.add_subcommand("hash", "Print the perceptual hash of an image");
	hash->add_option("image", o.target)->required();

	auto* reg = app.add_subcommand("register", "Register an image or hash");
	reg->add_option("target", o.target, "Image path or 16-digit hex hash")->required();
	reg->add_option("--platform", o.platform, "Platform identifier");
	reg->add_option("--timestamp", o.timestamp, "Creation time, YYYY-MM-DDTHH:MM:SSZ");
	reg->add_option("--meta", o.meta, "Extra metadata key=value (repeatable)");

	auto* ver = app.add_subcommand("verify", "Look up an image or hash");
	ver->add_option("target", o.target, "Image path or 16-digit hex hash")->required();
	ver->add_option("--tau", o.tau, "Override the Hamming threshold");
	ver->add_option("--tolerance", o.tolerance, "Override the prefix flip tolerance");

	app.add_subcommand("stats", "Bucket occupancy statistics");
	app.add_subcommand("root", "Current commitment root");
	app.add_subcommand("audit", "Recompute every commitment and check the ledger");

	auto* proof = app.add_subcommand("proof", "Inclusion proof for a bucket prefix");
	proof->add_option("prefix", o.prefix, "4 hex digits")->required();
	proof->add_option("--out", o.proof_out, "Also write the binary proof here");

	auto* check = app.add_subcommand("check-proof", "Verify a proof file (JSON or binary)");
	check->add_option("file", o.proof_file)->required();
	check->add_option("--root", o.root_hex, "Root to check against (default: the registry's)");

	auto* bench = app.add_subcommand("bench", "Latency benchmark on synthetic hashes");
	bench->add_option("--sizes", o.sizes, "Ascending index sizes")->delimiter(',');
	bench->add_option("--queries", o.queries)->capture_default_str();
	bench->add_option("--seed", o.seed)->capture_default_str();
	bench->add_option("--tolerance", o.tolerance);
	bench->add_flag("--fresh", o.fresh, "Fresh random queries instead of corpus samples");
	bench->add_option("--csv", o.csv, "Write CSV here");

	auto* sweep = app.add_subcommand("sweep", "Threshold sweep over an image corpus");
	sweep->add_option("--corpus", o.corpus, "Directory with originals/ and negatives/")->required();
	sweep->add_option("--edited", o.edited)->capture_default_str();
	sweep->add_option("--seed", o.seed)->capture_default_str();
	sweep->add_option("--taus", o.taus)->delimiter(',');
	sweep->add_option("--tolerances", o.tolerances)->delimiter(',');
	sweep->add_option("--csv", o.csv, "Write CSV here");

	auto* tr = app.add_subcommand("transform", "Apply one image edit");
	tr->add_option("input", o.input)->required();
	tr->add_option("output", o.output)->required();
	tr->add_option("--kind", o.kind, "blur, sharpen, edge_enhance, brightness, contrast, color_shift, text_overlay, noise")
		->required();
	tr->add_option("--magnitude", o.magnitude)->required();
	tr->add_option("--seed", o.seed)->capture_default_str();

	auto* serve = app.add_subcommand("serve", "Run the HTTP service");
	serve->add_option("--host", o.host)->capture_default_str();
	serve->add_option("--port", o.port)->capture_default_str();

	std::vector<const char*> argv;
	for (const auto& a : args)
		argv.push_back(a.c_str());
	try {
		app.parse(static_cast<int>(argv.size()), argv.data());
	} catch (const CLI::CallForHelp& e) {
		return app.exit(e, out, err);
	} catch (const CLI::ParseError& e) {
		app.exit(e, out, err);
		err << app.help();
		return exit_usage;
	}

	try {
		return run_command(app, o, out, err);
	} catch (const ConfigError& e) {
		err << "phreg: " << e.what() << '\n';
		return exit_usage;
	} catch (const InvalidInputError& e) {
		err << "phreg: " << e.what() << '\n';
		return exit_invalid_input;
	} catch (const InvalidImageError& e) {
		err << "phreg: " << e.what() << '\n';
		return exit_invalid_input;
	} catch (const DomainError& e) {
		err << "phreg: " << e.what() << '\n';
		return exit_invalid_input;
	} catch (const NotFoundError& e) {
		err << "phreg: " << e.what() << '\n';
		return exit_not_found;
	} catch (const IntegrityError& e) {
		err << "phreg: integrity failure: " << e.what() << '\n';
		return exit_storage;
	} catch (const StorageError& e) {
		err << "phreg: " << e.what() << '\n';
		return exit_storage;
	} catch (const std::exception& e) {
		err << "phreg: unexpected error: " << e.what() << '\n';
		return exit_unexpected;
	}
}

} // namespace phreg
