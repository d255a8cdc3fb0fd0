#include "phreg/timeutil.hpp"

#include <cstdio>
#include <ctime>

namespace phreg {

Timestamp system_now()
{
	return std::chrono::floor<std::chrono::seconds>(std::chrono::system_clock::now());
}

std::string format_iso8601(Timestamp t)
{
	const std::time_t tt = t.time_since_epoch().count();
	std::tm tm{};
	gmtime_r(&tt, &tm);
	char buf[32];
	std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
	return buf;
}

std::optional<Timestamp> parse_iso8601(std::string_view text)
{
	if (text.size() != 20)
		return std::nullopt;
	std::string s(text);
	std::tm tm{};
	int consumed = 0;
	if (std::sscanf(s.c_str(), "%4d-%2d-%2dT%2d:%2d:%2dZ%n", &tm.tm_year, &tm.tm_mon, &tm.tm_mday, &tm.tm_hour,
	                &tm.tm_min, &tm.tm_sec, &consumed)
	        != 6
	    || consumed != 20)
		return std::nullopt;
	tm.tm_year -= 1900;
	tm.tm_mon -= 1;
	const Timestamp t{std::chrono::seconds{timegm(&tm)}};
	// Rejects out-of-range fields that timegm would silently normalise.
	if (format_iso8601(t) != text)
		return std::nullopt;
	return t;
}

} // namespace phreg
