#pragma once

#include <string>

#include "microelast/network.hpp"

namespace microelast {

/// Versioned binary parameter snapshot: magic + topology echo followed
/// by the flat parameter vector as little-endian doubles. Loading
/// validates magic, version, and topology agreement.
void save_snapshot(const std::string& path, const Topology& topo,
                   const Vector& params);

std::pair<Topology, Vector> load_snapshot(const std::string& path);

}  // namespace microelast
