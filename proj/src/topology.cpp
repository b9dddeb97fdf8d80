#include "flowspine/topology.hpp"

#include <algorithm>
#include <cassert>
#include <limits>
#include <stdexcept>

#include "flowspine/errors.hpp"

namespace flowspine {

namespace detail {

std::vector<std::vector<NodeIndex>> tarjan_components(std::size_t n,
                                                      std::span<const std::uint32_t> offsets,
                                                      std::span<const NodeIndex> targets) {
  constexpr std::uint32_t kUnvisited = std::numeric_limits<std::uint32_t>::max();

  std::vector<std::uint32_t> index(n, kUnvisited);
  std::vector<std::uint32_t> lowlink(n, 0);
  std::vector<char> on_stack(n, 0);
  std::vector<NodeIndex> stack;
  std::vector<std::vector<NodeIndex>> components;
  std::uint32_t counter = 0;

  struct Frame {
    NodeIndex v;
    std::uint32_t next_edge;
  };
  std::vector<Frame> frames;

  for (NodeIndex root = 0; root < n; ++root) {
    if (index[root] != kUnvisited) continue;
    frames.push_back({root, offsets[root]});
    index[root] = lowlink[root] = counter++;
    stack.push_back(root);
    on_stack[root] = 1;

    while (!frames.empty()) {
      Frame& f = frames.back();
      const NodeIndex v = f.v;
      if (f.next_edge < offsets[v + 1]) {
        const NodeIndex w = targets[f.next_edge++];
        if (index[w] == kUnvisited) {
          index[w] = lowlink[w] = counter++;
          stack.push_back(w);
          on_stack[w] = 1;
          frames.push_back({w, offsets[w]});
        } else if (on_stack[w]) {
          lowlink[v] = std::min(lowlink[v], index[w]);
        }
      } else {
        frames.pop_back();
        if (!frames.empty()) {
          NodeIndex parent = frames.back().v;
          lowlink[parent] = std::min(lowlink[parent], lowlink[v]);
        }
        if (lowlink[v] == index[v]) {
          std::vector<NodeIndex> comp;
          NodeIndex w;
          do {
            w = stack.back();
            stack.pop_back();
            on_stack[w] = 0;
            comp.push_back(w);
          } while (w != v);
          components.push_back(std::move(comp));
        }
      }
    }
  }
  return components;
}

}  // namespace detail

namespace {

// CSR of out-neighbor indices only, built from the network's edge CSR.
struct Adjacency {
  std::vector<std::uint32_t> offsets;
  std::vector<NodeIndex> targets;
};

Adjacency out_adjacency(const OwnershipNetwork& net) {
  Adjacency adj;
  const std::size_t n = net.node_count();
  adj.offsets.assign(n + 1, 0);
  adj.targets.reserve(net.edge_count());
  for (NodeIndex i = 0; i < n; ++i) {
    for (const Edge& e : net.out_edges(i)) adj.targets.push_back(e.target);
    adj.offsets[i + 1] = static_cast<std::uint32_t>(adj.targets.size());
  }
  return adj;
}

void sort_by_id(const OwnershipNetwork& net, std::vector<NodeIndex>& nodes) {
  std::sort(nodes.begin(), nodes.end(), [&](NodeIndex a, NodeIndex b) {
    return net.node(a).id < net.node(b).id;
  });
}

}  // namespace

std::vector<Scc> strongly_connected_components(const OwnershipNetwork& net) {
  Adjacency adj = out_adjacency(net);
  auto raw = detail::tarjan_components(net.node_count(), adj.offsets, adj.targets);

  std::vector<Scc> sccs;
  sccs.reserve(raw.size());
  for (auto& members : raw) {
    Scc scc;
    scc.members = std::move(members);
    sort_by_id(net, scc.members);
    sccs.push_back(std::move(scc));
  }
  std::sort(sccs.begin(), sccs.end(), [&](const Scc& a, const Scc& b) {
    return net.node(a.members.front()).id < net.node(b.members.front()).id;
  });
  return sccs;
}

BowTie bowtie_decompose(const OwnershipNetwork& net, const Scc& core) {
  if (core.size() < 2)
    throw CoreTooSmallError("bow-tie core must contain at least two nodes");

  const std::size_t n = net.node_count();
  std::vector<char> in_core(n, 0);
  for (NodeIndex v : core.members) in_core[v] = 1;

  // Forward reachability from the core (OUT), backward reachability (IN),
  // and the undirected weak component; all plain BFS.
  std::vector<char> fwd(n, 0), bwd(n, 0), weak(n, 0);
  std::vector<NodeIndex> queue;

  auto run = [&](std::vector<char>& seen, auto&& expand) {
    queue.assign(core.members.begin(), core.members.end());
    for (NodeIndex v : core.members) seen[v] = 1;
    while (!queue.empty()) {
      NodeIndex v = queue.back();
      queue.pop_back();
      expand(v, [&](NodeIndex w) {
        if (!seen[w]) {
          seen[w] = 1;
          queue.push_back(w);
        }
      });
    }
  };

  run(fwd, [&](NodeIndex v, auto&& visit) {
    for (const Edge& e : net.out_edges(v)) visit(e.target);
  });
  run(bwd, [&](NodeIndex v, auto&& visit) {
    for (EdgeId e : net.in_edge_ids(v)) visit(net.edges()[e].source);
  });
  run(weak, [&](NodeIndex v, auto&& visit) {
    for (const Edge& e : net.out_edges(v)) visit(e.target);
    for (EdgeId e : net.in_edge_ids(v)) visit(net.edges()[e].source);
  });

  BowTie bt;
  bt.core = core;
  for (NodeIndex v = 0; v < n; ++v) {
    if (in_core[v] || !weak[v]) continue;
    const bool reaches = bwd[v];
    const bool reached = fwd[v];
    // A node both reaching and reachable would contradict core maximality.
    assert(!(reaches && reached));
    if (reaches)
      bt.in_set.push_back(v);
    else if (reached)
      bt.out_set.push_back(v);
    else
      bt.other.push_back(v);
  }
  sort_by_id(net, bt.in_set);
  sort_by_id(net, bt.out_set);
  sort_by_id(net, bt.other);
  return bt;
}

std::vector<BowTie> list_bowties(const OwnershipNetwork& net) {
  std::vector<BowTie> result;
  for (const Scc& scc : strongly_connected_components(net)) {
    if (scc.size() >= 2) result.push_back(bowtie_decompose(net, scc));
  }
  std::sort(result.begin(), result.end(), [&](const BowTie& a, const BowTie& b) {
    if (a.core.size() != b.core.size()) return a.core.size() > b.core.size();
    return net.node(a.core.members.front()).id < net.node(b.core.members.front()).id;
  });
  return result;
}

}  // namespace flowspine
