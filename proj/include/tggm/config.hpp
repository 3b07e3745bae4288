#pragma once

#include <map>
#include <string>

#include "tggm/mcmc.hpp"

namespace tggm {

using KeyValues = std::map<std::string, std::string>;

// Flat key=value file; '#' starts a comment, blank lines are skipped.
KeyValues read_config_file(const std::string& path);

void apply_override(KeyValues& kv, const std::string& key, const std::string& value);

// Builds a ChainConfig from key=value pairs. Exactly one of edge_proposals
// and proposals_per_edge must be present; unknown keys are errors.
ChainConfig chain_config_from(const KeyValues& kv, int p);

}  // namespace tggm
