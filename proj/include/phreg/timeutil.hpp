#pragma once

#include <chrono>
#include <functional>
#include <optional>
#include <string>
#include <string_view>

namespace phreg {

using Timestamp = std::chrono::sys_seconds;
using Clock = std::function<Timestamp()>;

Timestamp system_now();

// "YYYY-MM-DDTHH:MM:SSZ"
std::string format_iso8601(Timestamp t);
// Strict inverse of format_iso8601.
std::optional<Timestamp> parse_iso8601(std::string_view text);

} // namespace phreg
