#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "flowspine/backbone.hpp"
#include "flowspine/metrics.hpp"
#include "flowspine/network.hpp"
#include "flowspine/propagation.hpp"
#include "flowspine/topology.hpp"

namespace flowspine {

/// Shortest round-trip decimal representation of a double.
std::string format_double(double v);

// --- CSV ingestion --------------------------------------------------------
// Both formats are UTF-8, comma-separated, with `#` comment lines ignored.
// nodes: header `id,kind,value`, kind in {firm,holder}, empty value -> 0.
// edges: header `source,target,weight`; with percent=true weights are
// divided by 100 at ingestion.

std::vector<NodeRecord> parse_nodes_csv(std::string_view text, std::string_view origin);
std::vector<EdgeRecord> parse_edges_csv(std::string_view text, std::string_view origin,
                                        bool percent = false);

std::vector<NodeRecord> read_nodes_csv(const std::string& path);
std::vector<EdgeRecord> read_edges_csv(const std::string& path, bool percent = false);

// --- CSV emission ---------------------------------------------------------

void write_nodes_csv(std::ostream& os, const OwnershipNetwork& net);
void write_edges_csv(std::ostream& os, const OwnershipNetwork& net);

/// `id,k_in,k_out,strength,s,h,p,c`; undefined s prints as an empty cell.
void write_metrics_csv(std::ostream& os, const OwnershipNetwork& net,
                       const MetricsTable& metrics);

void write_curve_csv(std::ostream& os, const CumulativeControlCurve& curve);

void write_integrate_csv(std::ostream& os, const OwnershipNetwork& net,
                         std::span<const double> ctilde, std::span<const double> phi);

/// Sparse triples `i,j,value` with node ids.
void write_matrix_csv(std::ostream& os, const OwnershipNetwork& net,
                      std::span<const MatrixEntry> entries);

void write_distribution_csv(std::ostream& os, const DistributionSeries& series,
                            std::string_view metric_name, bool survival);

// --- JSON -----------------------------------------------------------------

std::string bowties_json(const OwnershipNetwork& net, std::span<const BowTie> bowties);
std::string backbone_json(const OwnershipNetwork& net, const Backbone& backbone,
                          const Classification& cls);
std::string classification_json(const Backbone& backbone, const Classification& cls);
std::string subnetwork_json(const OwnershipNetwork& net, const SubNetwork& sub);

// --- DOT ------------------------------------------------------------------

/// Deterministic digraph text; firm nodes are annotated with their value and
/// edges carry the ownership percent to two decimals.
std::string export_dot(const OwnershipNetwork& net, std::span<const NodeIndex> nodes,
                       std::span<const Edge> edges);

std::string export_backbone_dot(const OwnershipNetwork& net, const Backbone& backbone);

}  // namespace flowspine
