#pragma once

#include <cstddef>
#include <vector>

#include "arl/bitset.hpp"

// Maximal independent sets of an undirected conflict graph, enumerated as the
// maximal cliques of its complement (Bron-Kerbosch with Tomita pivoting).
// Both variants return index sets sorted ascending, the list sorted
// lexicographically, and throw ExtensionCapExceeded past `cap` sets.
namespace arl::kernels {

/// conflicts[v] holds the neighbours of v; the relation must be symmetric and irreflexive.
using ConflictGraph = std::vector<Bitset>;

namespace serial {
std::vector<std::vector<int>> maximal_independent_sets(const ConflictGraph& conflicts,
                                                       std::size_t cap);
}

namespace parallel {
/// Top-level branches run concurrently; output is identical to the serial kernel.
std::vector<std::vector<int>> maximal_independent_sets(const ConflictGraph& conflicts,
                                                       std::size_t cap);
}

}  // namespace arl::kernels
