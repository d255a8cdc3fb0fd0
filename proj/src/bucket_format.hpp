#pragma once

#include "phreg/bktree.hpp"
#include "phreg/registry.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace phreg::detail {

// <id> <HASH> <created_at> p:<platform> x:<k=v&...>\n
// Platform, keys and values are percent-encoded (RFC 3986 unreserved set).
std::string format_entry_line(const RegistryEntry& entry);

// Canonical bucket text: the BK stream of the tree built by inserting the
// entries in ascending (hash, id) order, a "--" line, then one entry line
// per entry in id order. Independent of the order of `entries`.
std::string canonical_bucket_text(std::vector<const RegistryEntry*> entries);

// Strict parse of canonical_bucket_text output. Throws IntegrityError when
// the text is malformed, the tree and entry table disagree, or the text is
// not in canonical form.
std::vector<RegistryEntry> parse_bucket_text(std::string_view text);

} // namespace phreg::detail
