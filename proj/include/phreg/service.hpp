#pragma once

#include "phreg/registry.hpp"

#include <filesystem>
#include <memory>
#include <optional>
#include <string>

namespace phreg {

// HTTP+JSON front end over a Registry.
//
//   POST /register   JSON {"hash", "platform_id"?, "created_at"?, "extra"?, "request_id"?}
//                    or raw image bytes with the same fields as query parameters
//   POST /verify     JSON {"hash", "tau"?, "tolerance"?} or raw image bytes
//   GET  /stats
//   GET  /root
//   GET  /proof/<PREFIX>
//
// Errors answer {"error": <kind>, "message": <text>} with 400 (invalid
// input or config), 404 (not found) or 500 (storage). Registrations are
// serialized and, when a snapshot directory is set, persisted before the
// response is sent. A repeated request_id returns the original entry.
class RegistryService
{
public:
	RegistryService(Registry& registry, std::optional<std::filesystem::path> snapshot_dir);
	~RegistryService();
	RegistryService(const RegistryService&) = delete;
	RegistryService& operator=(const RegistryService&) = delete;

	// Returns the bound port; throws StorageError on bind failure.
	int bind(const std::string& host, int port);
	// Blocks until stop() is called.
	void listen();
	void stop();
	void wait_until_ready() const;

private:
	struct Impl;
	std::unique_ptr<Impl> m_impl;
};

} // namespace phreg
