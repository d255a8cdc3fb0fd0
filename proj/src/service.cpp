#include "phreg/service.hpp"

#include "phreg/error.hpp"
#include "phreg/phash.hpp"

#include "httplib.h"

#include <map>
#include <mutex>

namespace phreg {

namespace {

using nlohmann::json;

bool is_json(const httplib::Request& req)
{
	return req.get_header_value("Content-Type").starts_with("application/json");
}

std::span<const std::uint8_t> body_bytes(const httplib::Request& req)
{
	return {reinterpret_cast<const std::uint8_t*>(req.body.data()), req.body.size()};
}

json parse_body(const httplib::Request& req)
{
	try {
		json j = json::parse(req.body);
		if (!j.is_object())
			throw InvalidInputError("request body must be a JSON object");
		return j;
	} catch (const json::exception& e) {
		throw InvalidInputError(std::string("malformed JSON body: ") + e.what());
	}
}

template <typename T>
std::optional<T> field(const json& j, const char* name)
{
	if (!j.contains(name) || j.at(name).is_null())
		return std::nullopt;
	try {
		return j.at(name).get<T>();
	} catch (const json::exception&) {
		throw InvalidInputError(std::string("field '") + name + "' has the wrong type");
	}
}

std::optional<int> int_param(const httplib::Request& req, const char* name)
{
	if (!req.has_param(name))
		return std::nullopt;
	const std::string v = req.get_param_value(name);
	try {
		std::size_t used = 0;
		const int n = std::stoi(v, &used);
		if (used != v.size())
			throw InvalidInputError("");
		return n;
	} catch (const std::exception&) {
		throw InvalidInputError(std::string("parameter '") + name + "' is not an integer");
	}
}

std::optional<std::string> str_param(const httplib::Request& req, const char* name)
{
	if (!req.has_param(name))
		return std::nullopt;
	return req.get_param_value(name);
}

// Query hash from either a JSON "hash" field or raw image bytes.
PerceptualHash query_hash(const httplib::Request& req, const json* body)
{
	if (body) {
		const auto hex = field<std::string>(*body, "hash");
		if (!hex)
			throw InvalidInputError("missing 'hash'");
		return PerceptualHash::parse(*hex);
	}
	if (req.body.empty())
		throw InvalidInputError("empty request body");
	return compute_phash(body_bytes(req));
}

void reply(httplib::Response& res, int status, const json& body)
{
	res.status = status;
	res.set_content(body.dump(2) + "\n", "application/json");
}

void reply_error(httplib::Response& res, int status, std::string_view kind, const std::string& message)
{
	reply(res, status, json{{"error", kind}, {"message", message}});
}

template <typename Fn>
httplib::Server::Handler guarded(Fn fn)
{
	return [fn](const httplib::Request& req, httplib::Response& res) {
		try {
			fn(req, res);
		} catch (const InvalidInputError& e) {
			reply_error(res, 400, "invalid_input", e.what());
		} catch (const InvalidImageError& e) {
			reply_error(res, 400, "invalid_image", e.what());
		} catch (const DomainError& e) {
			reply_error(res, 400, "invalid_input", e.what());
		} catch (const ConfigError& e) {
			reply_error(res, 400, "invalid_config", e.what());
		} catch (const NotFoundError& e) {
			reply_error(res, 404, "not_found", e.what());
		} catch (const IntegrityError& e) {
			reply_error(res, 500, "integrity", e.what());
		} catch (const StorageError& e) {
			reply_error(res, 500, "storage", e.what());
		} catch (const std::exception& e) {
			reply_error(res, 500, "internal", e.what());
		}
	};
}

} // namespace

struct RegistryService::Impl
{
	Registry& registry;
	std::optional<std::filesystem::path> snapshot_dir;
	httplib::Server server;
	std::mutex write_mutex; // serializes register + persist
	std::map<std::string, RegistryEntry> by_request_id;

	Impl(Registry& r, std::optional<std::filesystem::path> dir) : registry{r}, snapshot_dir{std::move(dir)} { routes(); }

	void handle_register(const httplib::Request& req, httplib::Response& res)
	{
		EntryMetadata meta;
		std::optional<std::string> request_id;
		std::optional<std::string> created_at;
		PerceptualHash hash;
		if (is_json(req)) {
			const json body = parse_body(req);
			hash = query_hash(req, &body);
			meta.platform_id = field<std::string>(body, "platform_id").value_or("");
			created_at = field<std::string>(body, "created_at");
			request_id = field<std::string>(body, "request_id");
			if (const auto extra = field<std::map<std::string, std::string>>(body, "extra"))
				meta.extra = *extra;
		} else {
			hash = query_hash(req, nullptr);
			meta.platform_id = str_param(req, "platform_id").value_or("");
			created_at = str_param(req, "created_at");
			request_id = str_param(req, "request_id");
		}
		if (created_at) {
			meta.created_at = parse_iso8601(*created_at);
			if (!meta.created_at)
				throw InvalidInputError("created_at is not an ISO-8601 UTC timestamp: " + *created_at);
		}

		std::lock_guard lock(write_mutex);
		if (request_id) {
			if (auto it = by_request_id.find(*request_id); it != by_request_id.end()) {
				reply(res, 200, to_json(it->second));
				return;
			}
		}
		const RegistryEntry entry = registry.register_hash(hash, std::move(meta));
		if (snapshot_dir)
			registry.save(*snapshot_dir);
		if (request_id)
			by_request_id.emplace(*request_id, entry);
		reply(res, 201, to_json(entry));
	}

	void handle_verify(const httplib::Request& req, httplib::Response& res) const
	{
		VerifyOptions opts;
		PerceptualHash hash;
		if (is_json(req)) {
			const json body = parse_body(req);
			hash = query_hash(req, &body);
			opts.tau = field<int>(body, "tau");
			opts.flip_tolerance = field<int>(body, "tolerance");
		} else {
			hash = query_hash(req, nullptr);
			opts.tau = int_param(req, "tau");
			opts.flip_tolerance = int_param(req, "tolerance");
		}
		reply(res, 200, to_json(registry.verify(hash, opts)));
	}

	void routes()
	{
		server.Post("/register", guarded([this](const auto& req, auto& res) { handle_register(req, res); }));
		server.Post("/verify", guarded([this](const auto& req, auto& res) { handle_verify(req, res); }));
		server.Get("/stats", guarded([this](const auto&, auto& res) { reply(res, 200, to_json(registry.stats())); }));
		server.Get("/root", guarded([this](const auto&, auto& res) {
			reply(res, 200, json{{"root", to_hex(registry.root())}, {"entries", registry.size()}});
		}));
		server.Get(R"(/proof/([0-9A-Fa-f]+))", guarded([this](const httplib::Request& req, auto& res) {
			const auto key = PrefixKey::from_hex(req.matches[1].str());
			if (!key)
				throw InvalidInputError("prefix must be 4 hex digits");
			reply(res, 200, to_json(registry.prove(*key)));
		}));
	}
};

RegistryService::RegistryService(Registry& registry, std::optional<std::filesystem::path> snapshot_dir)
	: m_impl{std::make_unique<Impl>(registry, std::move(snapshot_dir))}
{
}

RegistryService::~RegistryService() = default;

int RegistryService::bind(const std::string& host, int port)
{
	if (port == 0) {
		const int bound = m_impl->server.bind_to_any_port(host);
		if (bound <= 0)
			throw StorageError("cannot bind " + host);
		return bound;
	}
	if (!m_impl->server.bind_to_port(host, port))
		throw StorageError("cannot bind " + host + ":" + std::to_string(port));
	return port;
}

void RegistryService::listen()
{
	m_impl->server.listen_after_bind();
}

void RegistryService::stop()
{
	m_impl->server.stop();
}

void RegistryService::wait_until_ready() const
{
	m_impl->server.wait_until_ready();
}

} // namespace phreg
