#pragma once

#include <span>
#include <vector>

#include "flowspine/network.hpp"

namespace flowspine {

/// Maximal strongly connected component; members sorted by node id.
struct Scc {
  std::vector<NodeIndex> members;

  std::size_t size() const { return members.size(); }
};

/// Partition of all nodes into maximal SCCs, ordered by smallest member id.
std::vector<Scc> strongly_connected_components(const OwnershipNetwork& net);

struct BowTie {
  Scc core;
  std::vector<NodeIndex> in_set;   // reach the core
  std::vector<NodeIndex> out_set;  // reachable from the core
  std::vector<NodeIndex> other;    // rest of the weak component (tendrils, tubes)
};

/// Decomposes the weak component around `core`, which must be a maximal SCC
/// with at least two members.
BowTie bowtie_decompose(const OwnershipNetwork& net, const Scc& core);

/// One BowTie per SCC of size >= 2, sorted by core size descending.
std::vector<BowTie> list_bowties(const OwnershipNetwork& net);

namespace detail {

/// Iterative Tarjan over a CSR adjacency; safe for deep graphs. Returns
/// components as index lists in reverse topological discovery order.
std::vector<std::vector<NodeIndex>> tarjan_components(std::size_t n,
                                                      std::span<const std::uint32_t> offsets,
                                                      std::span<const NodeIndex> targets);

}  // namespace detail

}  // namespace flowspine
