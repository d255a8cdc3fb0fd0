#pragma once

#include "phreg/registry.hpp"

namespace phreg {

struct Registry::Bucket
{
	BkTree tree;
	std::vector<EntryId> ids; // ascending
};

} // namespace phreg
