#include "flowspine/network.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <utility>

#include "flowspine/errors.hpp"

namespace flowspine {

const char* to_string(NodeKind kind) {
  return kind == NodeKind::Firm ? "firm" : "holder";
}

std::optional<NodeIndex> OwnershipNetwork::find(std::string_view id) const {
  auto it = by_id_.find(std::string(id));
  if (it == by_id_.end()) return std::nullopt;
  return it->second;
}

std::span<const Edge> OwnershipNetwork::out_edges(NodeIndex i) const {
  return std::span<const Edge>(edges_.data() + out_offsets_[i],
                               out_offsets_[i + 1] - out_offsets_[i]);
}

std::span<const EdgeId> OwnershipNetwork::in_edge_ids(NodeIndex j) const {
  return std::span<const EdgeId>(in_ids_.data() + in_offsets_[j],
                                 in_offsets_[j + 1] - in_offsets_[j]);
}

std::size_t OwnershipNetwork::out_degree(NodeIndex i) const {
  return out_offsets_[i + 1] - out_offsets_[i];
}

std::size_t OwnershipNetwork::in_degree(NodeIndex j) const {
  return in_offsets_[j + 1] - in_offsets_[j];
}

double OwnershipNetwork::in_weight_sum(NodeIndex j) const {
  double sum = 0.0;
  for (EdgeId e : in_edge_ids(j)) sum += edges_[e].weight;
  return sum;
}

double OwnershipNetwork::total_value() const {
  double sum = 0.0;
  for (const Node& n : nodes_) sum += n.value;
  return sum;
}

OwnershipNetwork OwnershipNetwork::assemble(std::vector<Node> nodes, std::vector<Edge> edges) {
  OwnershipNetwork net;
  net.nodes_ = std::move(nodes);
  net.edges_ = std::move(edges);

  std::sort(net.edges_.begin(), net.edges_.end(), [](const Edge& a, const Edge& b) {
    if (a.source != b.source) return a.source < b.source;
    return a.target < b.target;
  });

  const std::size_t n = net.nodes_.size();
  net.by_id_.reserve(n);
  for (NodeIndex i = 0; i < n; ++i) net.by_id_.emplace(net.nodes_[i].id, i);

  net.out_offsets_.assign(n + 1, 0);
  for (const Edge& e : net.edges_) ++net.out_offsets_[e.source + 1];
  for (std::size_t i = 0; i < n; ++i) net.out_offsets_[i + 1] += net.out_offsets_[i];

  net.in_ids_.resize(net.edges_.size());
  for (EdgeId e = 0; e < net.edges_.size(); ++e) net.in_ids_[e] = e;
  std::sort(net.in_ids_.begin(), net.in_ids_.end(), [&](EdgeId a, EdgeId b) {
    const Edge& ea = net.edges_[a];
    const Edge& eb = net.edges_[b];
    if (ea.target != eb.target) return ea.target < eb.target;
    return ea.source < eb.source;
  });

  net.in_offsets_.assign(n + 1, 0);
  for (const Edge& e : net.edges_) ++net.in_offsets_[e.target + 1];
  for (std::size_t i = 0; i < n; ++i) net.in_offsets_[i + 1] += net.in_offsets_[i];

  return net;
}

namespace {

void warn(std::vector<std::string>* warnings, std::string msg) {
  if (warnings) warnings->push_back(std::move(msg));
}

}  // namespace

OwnershipNetwork load_network(std::span<const NodeRecord> node_records,
                              std::span<const EdgeRecord> edge_records,
                              std::vector<std::string>* warnings) {
  std::vector<Node> nodes;
  nodes.reserve(node_records.size());
  std::unordered_map<std::string, NodeIndex> index;
  index.reserve(node_records.size());

  for (const NodeRecord& rec : node_records) {
    if (rec.id.empty()) throw MalformedRecordError("node record with empty id");
    if (rec.value && *rec.value < 0.0)
      throw NegativeValueError("node '" + rec.id + "' has negative value");
    if (index.count(rec.id)) throw DuplicateNodeIdError("duplicate node id '" + rec.id + "'");
    Node node;
    node.id = rec.id;
    node.kind = rec.kind;
    node.value = rec.value.value_or(0.0);
    node.unlisted = !rec.value.has_value();
    index.emplace(node.id, static_cast<NodeIndex>(nodes.size()));
    nodes.push_back(std::move(node));
  }

  // Endpoints that only appear in edges: sources become pure holders, but a
  // node that is owned by somebody has to be a firm or it would break the
  // pure-holder invariant on arrival.
  auto ensure_node = [&](const std::string& id, bool as_target) -> NodeIndex {
    auto it = index.find(id);
    if (it != index.end()) {
      if (as_target && nodes[it->second].auto_created &&
          nodes[it->second].kind == NodeKind::PureHolder) {
        nodes[it->second].kind = NodeKind::Firm;
      }
      return it->second;
    }
    Node node;
    node.id = id;
    node.kind = as_target ? NodeKind::Firm : NodeKind::PureHolder;
    node.value = 0.0;
    node.unlisted = true;
    node.auto_created = true;
    NodeIndex idx = static_cast<NodeIndex>(nodes.size());
    index.emplace(id, idx);
    nodes.push_back(std::move(node));
    warn(warnings, "node '" + id + "' auto-created from edge list");
    return idx;
  };

  std::map<std::pair<NodeIndex, NodeIndex>, double> merged;
  for (const EdgeRecord& rec : edge_records) {
    if (rec.source.empty() || rec.target.empty())
      throw MalformedRecordError("edge record with empty endpoint id");
    if (!(rec.weight > 0.0))
      throw NegativeWeightError("edge " + rec.source + " -> " + rec.target +
                                " has nonpositive weight");
    if (rec.source == rec.target) {
      warn(warnings, "self-loop on '" + rec.source + "' dropped");
      continue;
    }
    NodeIndex s = ensure_node(rec.source, /*as_target=*/false);
    NodeIndex t = ensure_node(rec.target, /*as_target=*/true);
    if (rec.weight > 1.0)
      warn(warnings, "edge " + rec.source + " -> " + rec.target +
                         " has weight > 1; kept, normalization will rescale");
    auto [it, inserted] = merged.emplace(std::make_pair(s, t), rec.weight);
    if (!inserted) {
      it->second += rec.weight;
      warn(warnings, "duplicate edge " + rec.source + " -> " + rec.target +
                         " merged by summation");
    }
  }

  std::vector<Edge> edges;
  edges.reserve(merged.size());
  for (const auto& [key, weight] : merged)
    edges.push_back(Edge{key.first, key.second, weight});

  return OwnershipNetwork::assemble(std::move(nodes), std::move(edges));
}

OwnershipNetwork normalize_ownership(const OwnershipNetwork& net,
                                     std::vector<std::string>* warnings) {
  std::vector<Edge> edges = net.edges_;
  const std::size_t n = net.node_count();
  for (NodeIndex j = 0; j < n; ++j) {
    auto ids = net.in_edge_ids(j);
    if (ids.empty()) continue;
    double sum = 0.0;
    for (EdgeId e : ids) sum += edges[e].weight;
    if (std::abs(sum - 1.0) <= kColumnSumTolerance) continue;
    if (sum > 1.0 + kColumnSumTolerance)
      warn(warnings, "ownership of '" + net.node(j).id + "' sums to " +
                         std::to_string(sum) + "; scaled down to 1");
    for (EdgeId e : ids) edges[e].weight /= sum;
  }
  return OwnershipNetwork::assemble(net.nodes_, std::move(edges));
}

ValidationReport validate(const OwnershipNetwork& net) {
  ValidationReport report;
  const std::size_t n = net.node_count();
  for (NodeIndex j = 0; j < n; ++j) {
    const Node& node = net.node(j);
    const std::size_t k_in = net.in_degree(j);

    if (k_in > 0) {
      double sum = net.in_weight_sum(j);
      if (sum > 1.0 + kColumnSumTolerance) {
        report.violations.push_back(
            {ValidationIssue::Code::ColumnSumExceedsOne, node.id,
             "in-weights of '" + node.id + "' sum to " + std::to_string(sum)});
      }
      if (node.kind == NodeKind::PureHolder) {
        report.violations.push_back(
            {ValidationIssue::Code::HolderWithOwners, node.id,
             "pure holder '" + node.id + "' has incoming ownership edges"});
      }
    }

    if (node.kind == NodeKind::Firm && node.value == 0.0) {
      if (node.unlisted) {
        report.notes.push_back("firm '" + node.id +
                               "' has no reported value; kept with value 0");
      } else {
        report.violations.push_back(
            {ValidationIssue::Code::ZeroValueListedFirm, node.id,
             "listed firm '" + node.id + "' has value 0"});
      }
    }
    if (node.kind == NodeKind::Firm && node.value > 0.0 && k_in == 0) {
      report.notes.push_back("firm '" + node.id +
                             "' has value but no shareholders; its value can "
                             "never be controlled");
    }
    if (node.kind == NodeKind::PureHolder && node.value > 0.0) {
      report.notes.push_back("holder '" + node.id +
                             "' carries a market value; it is counted in the "
                             "total but cannot be controlled");
    }
  }
  return report;
}

}  // namespace flowspine
