#pragma once

// Shared fixtures and independent oracles for the test suites. The oracles
// here deliberately avoid the library's implementation paths: Kosaraju
// instead of Tarjan, from-scratch set recomputation instead of the
// incremental curve, plain topological DP for path lengths.

#include <algorithm>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "flowspine/backbone.hpp"
#include "flowspine/metrics.hpp"
#include "flowspine/network.hpp"
#include "flowspine/propagation.hpp"

namespace testutil {

using namespace flowspine;

inline NodeRecord firm(std::string id, double value) {
  return NodeRecord{std::move(id), NodeKind::Firm, value};
}

inline NodeRecord holder(std::string id) {
  return NodeRecord{std::move(id), NodeKind::PureHolder, 0.0};
}

inline EdgeRecord edge(std::string source, std::string target, double weight) {
  return EdgeRecord{std::move(source), std::move(target), weight};
}

inline OwnershipNetwork make_net(const std::vector<NodeRecord>& nodes,
                                 const std::vector<EdgeRecord>& edges,
                                 std::vector<std::string>* warnings = nullptr) {
  return load_network(nodes, edges, warnings);
}

inline std::vector<double> values_of(const OwnershipNetwork& net) {
  std::vector<double> v(net.node_count());
  for (NodeIndex i = 0; i < net.node_count(); ++i) v[i] = net.node(i).value;
  return v;
}

// --- Kosaraju two-pass SCC oracle ------------------------------------------

inline std::vector<std::vector<NodeIndex>> kosaraju_components(const OwnershipNetwork& net) {
  const std::size_t n = net.node_count();
  std::vector<std::vector<NodeIndex>> fwd(n), rev(n);
  for (const Edge& e : net.edges()) {
    fwd[e.source].push_back(e.target);
    rev[e.target].push_back(e.source);
  }

  std::vector<char> seen(n, 0);
  std::vector<NodeIndex> order;
  for (NodeIndex root = 0; root < n; ++root) {
    if (seen[root]) continue;
    // iterative post-order
    std::vector<std::pair<NodeIndex, std::size_t>> stack{{root, 0}};
    seen[root] = 1;
    while (!stack.empty()) {
      auto& [v, pos] = stack.back();
      if (pos < fwd[v].size()) {
        NodeIndex w = fwd[v][pos++];
        if (!seen[w]) {
          seen[w] = 1;
          stack.push_back({w, 0});
        }
      } else {
        order.push_back(v);
        stack.pop_back();
      }
    }
  }

  std::vector<std::vector<NodeIndex>> components;
  std::vector<char> assigned(n, 0);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    if (assigned[*it]) continue;
    std::vector<NodeIndex> comp;
    std::vector<NodeIndex> stack{*it};
    assigned[*it] = 1;
    while (!stack.empty()) {
      NodeIndex v = stack.back();
      stack.pop_back();
      comp.push_back(v);
      for (NodeIndex w : rev[v]) {
        if (!assigned[w]) {
          assigned[w] = 1;
          stack.push_back(w);
        }
      }
    }
    components.push_back(std::move(comp));
  }
  return components;
}

// Canonical form: members sorted, components sorted by first member.
inline std::vector<std::vector<NodeIndex>> canonical_partition(
    std::vector<std::vector<NodeIndex>> parts) {
  for (auto& p : parts) std::sort(p.begin(), p.end());
  std::sort(parts.begin(), parts.end());
  return parts;
}

// --- brute-force cumulative control oracle ----------------------------------

struct OracleStep {
  std::set<NodeIndex> u_in;
  std::set<NodeIndex> u_cu;
  double v_cu = 0.0;
};

inline std::vector<OracleStep> brute_force_curve(const OwnershipNetwork& net,
                                                 const std::vector<NodeIndex>& ranking,
                                                 double delta) {
  std::vector<OracleStep> steps;
  for (std::size_t n = 1; n <= ranking.size(); ++n) {
    OracleStep step;
    for (NodeIndex j = 0; j < net.node_count(); ++j) {
      bool individually = false;
      double sum = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        for (const Edge& e : net.out_edges(ranking[k])) {
          if (e.target != j) continue;
          sum += e.weight;
          if (e.weight > delta) individually = true;
        }
      }
      if (individually)
        step.u_in.insert(j);
      else if (sum > delta)
        step.u_cu.insert(j);
    }
    for (NodeIndex j : step.u_in) step.v_cu += net.node(j).value;
    for (NodeIndex j : step.u_cu) step.v_cu += net.node(j).value;
    steps.push_back(std::move(step));
  }
  return steps;
}

// --- random fixtures --------------------------------------------------------

// Firms owned partly by firms, partly by holders; every firm column sums to
// one with at least 30% held outside any cycle, so the Frobenius condition
// holds by construction.
inline OwnershipNetwork random_network(std::mt19937_64& rng, std::size_t n_firms,
                                       std::size_t n_holders, double firm_edge_prob) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> raw(0.1, 1.0);
  std::uniform_real_distribution<double> value(1.0, 100.0);
  std::uniform_real_distribution<double> holder_share(0.3, 0.7);
  std::uniform_int_distribution<std::size_t> holder_pick(0, n_holders - 1);

  std::vector<NodeRecord> nodes;
  std::vector<EdgeRecord> edges;
  for (std::size_t i = 0; i < n_holders; ++i) nodes.push_back(holder("H" + std::to_string(i)));
  for (std::size_t j = 0; j < n_firms; ++j)
    nodes.push_back(firm("F" + std::to_string(j), value(rng)));

  for (std::size_t j = 0; j < n_firms; ++j) {
    std::vector<std::pair<std::size_t, double>> firm_owners;
    for (std::size_t i = 0; i < n_firms; ++i) {
      if (i == j) continue;
      if (unit(rng) < firm_edge_prob) firm_owners.push_back({i, raw(rng)});
    }
    const double hs = firm_owners.empty() ? 1.0 : holder_share(rng);

    double firm_total = 0.0;
    for (auto& [i, w] : firm_owners) firm_total += w;
    for (auto& [i, w] : firm_owners)
      edges.push_back(edge("F" + std::to_string(i), "F" + std::to_string(j),
                           w / firm_total * (1.0 - hs)));

    const std::size_t owners = std::min<std::size_t>(n_holders, 1 + holder_pick(rng) % 3);
    std::vector<double> hw(owners);
    double hw_total = 0.0;
    for (double& w : hw) {
      w = raw(rng);
      hw_total += w;
    }
    std::set<std::size_t> used;
    for (std::size_t k = 0; k < owners; ++k) {
      std::size_t i = holder_pick(rng);
      while (used.count(i)) i = (i + 1) % n_holders;
      used.insert(i);
      edges.push_back(
          edge("H" + std::to_string(i), "F" + std::to_string(j), hw[k] / hw_total * hs));
    }
  }
  std::vector<std::string> warnings;
  OwnershipNetwork net = load_network(nodes, edges, &warnings);
  return normalize_ownership(net);
}

// Small bipartite market: a handful of holders splitting each stock.
inline OwnershipNetwork random_small_market(std::mt19937_64& rng, std::size_t n_holders,
                                            std::size_t n_stocks) {
  std::uniform_real_distribution<double> raw(0.05, 1.0);
  std::uniform_real_distribution<double> value(1.0, 50.0);
  std::uniform_int_distribution<std::size_t> count(1, n_holders);

  std::vector<NodeRecord> nodes;
  std::vector<EdgeRecord> edges;
  for (std::size_t i = 0; i < n_holders; ++i) nodes.push_back(holder("H" + std::to_string(i)));
  for (std::size_t j = 0; j < n_stocks; ++j) {
    nodes.push_back(firm("S" + std::to_string(j), value(rng)));
    const std::size_t owners = count(rng);
    std::vector<std::size_t> picks(n_holders);
    for (std::size_t i = 0; i < n_holders; ++i) picks[i] = i;
    std::shuffle(picks.begin(), picks.end(), rng);
    std::vector<double> w(owners);
    double total = 0.0;
    for (double& x : w) {
      x = raw(rng);
      total += x;
    }
    for (std::size_t k = 0; k < owners; ++k)
      edges.push_back(
          edge("H" + std::to_string(picks[k]), "S" + std::to_string(j), w[k] / total));
  }
  return normalize_ownership(make_net(nodes, edges));
}

// DAG in ownership orientation: roots (pure holders) have no in-edges and
// produce no value, every other column sums to exactly one.
inline OwnershipNetwork random_dag(std::mt19937_64& rng, std::size_t n_roots,
                                   std::size_t n_inner) {
  std::uniform_real_distribution<double> raw(0.1, 1.0);
  std::uniform_real_distribution<double> value(1.0, 20.0);

  const std::size_t n = n_roots + n_inner;
  std::vector<NodeRecord> nodes;
  std::vector<EdgeRecord> edges;
  auto name = [](std::size_t k) { return "N" + std::to_string(k); };
  for (std::size_t k = 0; k < n; ++k) {
    if (k < n_roots)
      nodes.push_back(holder(name(k)));
    else
      nodes.push_back(firm(name(k), value(rng)));
  }
  for (std::size_t j = n_roots; j < n; ++j) {
    std::uniform_int_distribution<std::size_t> owner_pick(0, j - 1);
    std::uniform_int_distribution<std::size_t> count(1, std::min<std::size_t>(3, j));
    std::set<std::size_t> owners;
    const std::size_t k_in = count(rng);
    while (owners.size() < k_in) owners.insert(owner_pick(rng));
    std::vector<double> w(owners.size());
    double total = 0.0;
    for (double& x : w) {
      x = raw(rng);
      total += x;
    }
    std::size_t idx = 0;
    for (std::size_t i : owners) edges.push_back(edge(name(i), name(j), w[idx++] / total));
  }
  return make_net(nodes, edges);
}

// Longest path length in edges over a DAG, straight topological DP.
inline std::size_t longest_path_edges(const OwnershipNetwork& net) {
  const std::size_t n = net.node_count();
  std::vector<std::size_t> indeg(n, 0), depth(n, 0);
  for (const Edge& e : net.edges()) ++indeg[e.target];
  std::vector<NodeIndex> queue;
  for (NodeIndex v = 0; v < n; ++v)
    if (indeg[v] == 0) queue.push_back(v);
  std::size_t best = 0;
  while (!queue.empty()) {
    NodeIndex v = queue.back();
    queue.pop_back();
    for (const Edge& e : net.out_edges(v)) {
      depth[e.target] = std::max(depth[e.target], depth[v] + 1);
      best = std::max(best, depth[e.target]);
      if (--indeg[e.target] == 0) queue.push_back(e.target);
    }
  }
  return best;
}

}  // namespace testutil
