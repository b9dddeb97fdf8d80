#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace flowspine {

using NodeIndex = std::uint32_t;
using EdgeId = std::uint32_t;

/// Tolerance on ownership column sums; absorbs double-precision
/// accumulation noise without hiding real data errors.
inline constexpr double kColumnSumTolerance = 1e-9;

enum class NodeKind : std::uint8_t {
  Firm,        // listed company; carries a market capitalization
  PureHolder,  // shareholder that cannot be owned (person, family, fund, state, ...)
};

struct Node {
  std::string id;
  NodeKind kind = NodeKind::PureHolder;
  double value = 0.0;         // market capitalization, thousand USD
  bool unlisted = false;      // value was not reported in the input
  bool auto_created = false;  // materialized from an edge endpoint
};

/// source owns fraction `weight` of target's shares.
struct Edge {
  NodeIndex source = 0;
  NodeIndex target = 0;
  double weight = 0.0;
};

struct NodeRecord {
  std::string id;
  NodeKind kind = NodeKind::PureHolder;
  std::optional<double> value;  // nullopt: not reported -> 0 and flagged unlisted
};

struct EdgeRecord {
  std::string source;
  std::string target;
  double weight = 0.0;
};

/// Weighted directed ownership graph, the single source of truth for all
/// analysis modules. Immutable once built; concurrent reads are safe.
class OwnershipNetwork {
 public:
  OwnershipNetwork() = default;

  std::size_t node_count() const { return nodes_.size(); }
  std::size_t edge_count() const { return edges_.size(); }

  const Node& node(NodeIndex i) const { return nodes_[i]; }
  const std::vector<Node>& nodes() const { return nodes_; }

  /// Canonical edge list, sorted by (source, target).
  const std::vector<Edge>& edges() const { return edges_; }

  std::optional<NodeIndex> find(std::string_view id) const;

  std::span<const Edge> out_edges(NodeIndex i) const;

  /// Ids into edges() of node j's incoming edges, sorted by source.
  std::span<const EdgeId> in_edge_ids(NodeIndex j) const;

  std::size_t out_degree(NodeIndex i) const;
  std::size_t in_degree(NodeIndex j) const;

  double in_weight_sum(NodeIndex j) const;

  /// Sum of all node values (the total market value v_tot).
  double total_value() const;

 private:
  static OwnershipNetwork assemble(std::vector<Node> nodes, std::vector<Edge> edges);

  friend OwnershipNetwork load_network(std::span<const NodeRecord>, std::span<const EdgeRecord>,
                                       std::vector<std::string>*);
  friend OwnershipNetwork normalize_ownership(const OwnershipNetwork&,
                                              std::vector<std::string>*);

  std::vector<Node> nodes_;
  std::vector<Edge> edges_;                 // sorted by (source, target)
  std::vector<std::uint32_t> out_offsets_;  // CSR over edges_, size n+1
  std::vector<EdgeId> in_ids_;              // edge ids sorted by (target, source)
  std::vector<std::uint32_t> in_offsets_;   // CSR over in_ids_, size n+1
  std::unordered_map<std::string, NodeIndex> by_id_;
};

/// Builds a network from parsed records. Duplicate (source,target) edges are
/// merged by summation, self-loops dropped, and endpoints missing from the
/// node records auto-created; each such repair appends a warning.
OwnershipNetwork load_network(std::span<const NodeRecord> node_records,
                              std::span<const EdgeRecord> edge_records,
                              std::vector<std::string>* warnings = nullptr);

/// Rescales every owned node's in-weights so they sum to exactly 1. Columns
/// above 1 + tolerance are data errors: scaled down with a warning. Columns
/// already within tolerance of 1 are left untouched, which makes the
/// operation idempotent.
OwnershipNetwork normalize_ownership(const OwnershipNetwork& net,
                                     std::vector<std::string>* warnings = nullptr);

struct ValidationIssue {
  enum class Code {
    ColumnSumExceedsOne,
    HolderWithOwners,
    ZeroValueListedFirm,
  };
  Code code;
  std::string node_id;
  std::string message;
};

struct ValidationReport {
  std::vector<ValidationIssue> violations;
  std::vector<std::string> notes;  // informational; not invariant breaches

  bool ok() const { return violations.empty(); }
};

/// Checks the type invariants (column sums, pure-holder in-edges, zero-value
/// listed firms) and reports data-quality notes that are not violations.
ValidationReport validate(const OwnershipNetwork& net);

const char* to_string(NodeKind kind);

}  // namespace flowspine
