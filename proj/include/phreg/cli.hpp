#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace phreg {

// Process exit codes. Each error class maps to exactly one code.
enum ExitCode : int {
	exit_ok = 0,
	exit_unexpected = 1,
	exit_usage = 2,         // unknown command, bad flag, bad config value
	exit_invalid_input = 3, // malformed hash, undecodable image, out-of-domain value
	exit_not_found = 4,     // missing registry, unknown prefix
	exit_storage = 5,       // unreadable/unwritable files, integrity failure
};

// Runs one `phreg` command line. args[0] is the program name. Nothing is
// written to std::cout / std::cerr directly, so the whole command surface
// can be driven in-process.
int cli_dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace phreg
