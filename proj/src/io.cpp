#include "flowspine/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "flowspine/errors.hpp"

namespace flowspine {

using ordered_json = nlohmann::ordered_json;

std::string format_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) {
    s.remove_prefix(1);
  }
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= line.size(); ++i) {
    if (i == line.size() || line[i] == ',') {
      fields.push_back(trim(line.substr(start, i - start)));
      start = i + 1;
    }
  }
  return fields;
}

double parse_number(std::string_view field, std::string_view origin, std::size_t line_no) {
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc{} || ptr != field.data() + field.size())
    throw MalformedRecordError(std::string(origin) + ":" + std::to_string(line_no) +
                               ": cannot parse number '" + std::string(field) + "'");
  return value;
}

// Yields (line_no, content) for every non-empty, non-comment line.
template <typename Fn>
void for_each_line(std::string_view text, Fn&& fn) {
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    ++line_no;
    std::string_view line = trim(text.substr(pos, end - pos));
    if (!line.empty() && line.front() != '#') fn(line_no, line);
    pos = end + 1;
    if (end == text.size()) break;
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

std::vector<NodeRecord> parse_nodes_csv(std::string_view text, std::string_view origin) {
  std::vector<NodeRecord> records;
  bool header_seen = false;
  for_each_line(text, [&](std::size_t line_no, std::string_view line) {
    auto fields = split_fields(line);
    if (!header_seen) {
      if (fields.size() != 3 || fields[0] != "id" || fields[1] != "kind" ||
          fields[2] != "value")
        throw MalformedRecordError(std::string(origin) + ":" + std::to_string(line_no) +
                                   ": expected header 'id,kind,value'");
      header_seen = true;
      return;
    }
    if (fields.size() != 3)
      throw MalformedRecordError(std::string(origin) + ":" + std::to_string(line_no) +
                                 ": expected 3 fields, got " +
                                 std::to_string(fields.size()));
    NodeRecord rec;
    rec.id = std::string(fields[0]);
    if (rec.id.empty())
      throw MalformedRecordError(std::string(origin) + ":" + std::to_string(line_no) +
                                 ": empty node id");
    if (fields[1] == "firm")
      rec.kind = NodeKind::Firm;
    else if (fields[1] == "holder")
      rec.kind = NodeKind::PureHolder;
    else
      throw MalformedRecordError(std::string(origin) + ":" + std::to_string(line_no) +
                                 ": kind must be 'firm' or 'holder', got '" +
                                 std::string(fields[1]) + "'");
    if (!fields[2].empty()) {
      double v = parse_number(fields[2], origin, line_no);
      if (v < 0.0)
        throw NegativeValueError(std::string(origin) + ":" + std::to_string(line_no) +
                                 ": node '" + rec.id + "' has negative value");
      rec.value = v;
    }
    records.push_back(std::move(rec));
  });
  return records;
}

std::vector<EdgeRecord> parse_edges_csv(std::string_view text, std::string_view origin,
                                        bool percent) {
  std::vector<EdgeRecord> records;
  bool header_seen = false;
  for_each_line(text, [&](std::size_t line_no, std::string_view line) {
    auto fields = split_fields(line);
    if (!header_seen) {
      if (fields.size() != 3 || fields[0] != "source" || fields[1] != "target" ||
          fields[2] != "weight")
        throw MalformedRecordError(std::string(origin) + ":" + std::to_string(line_no) +
                                   ": expected header 'source,target,weight'");
      header_seen = true;
      return;
    }
    if (fields.size() != 3)
      throw MalformedRecordError(std::string(origin) + ":" + std::to_string(line_no) +
                                 ": expected 3 fields, got " +
                                 std::to_string(fields.size()));
    EdgeRecord rec;
    rec.source = std::string(fields[0]);
    rec.target = std::string(fields[1]);
    if (rec.source.empty() || rec.target.empty())
      throw MalformedRecordError(std::string(origin) + ":" + std::to_string(line_no) +
                                 ": empty endpoint id");
    rec.weight = parse_number(fields[2], origin, line_no);
    if (percent) rec.weight /= 100.0;
    if (!(rec.weight > 0.0))
      throw NegativeWeightError(std::string(origin) + ":" + std::to_string(line_no) +
                                ": edge " + rec.source + " -> " + rec.target +
                                " has nonpositive weight");
    records.push_back(std::move(rec));
  });
  return records;
}

std::vector<NodeRecord> read_nodes_csv(const std::string& path) {
  return parse_nodes_csv(read_file(path), path);
}

std::vector<EdgeRecord> read_edges_csv(const std::string& path, bool percent) {
  return parse_edges_csv(read_file(path), path, percent);
}

void write_nodes_csv(std::ostream& os, const OwnershipNetwork& net) {
  os << "id,kind,value\n";
  for (const Node& n : net.nodes()) {
    os << n.id << ',' << to_string(n.kind) << ',';
    if (!n.unlisted || n.value != 0.0) os << format_double(n.value);
    os << '\n';
  }
}

void write_edges_csv(std::ostream& os, const OwnershipNetwork& net) {
  os << "source,target,weight\n";
  for (const Edge& e : net.edges()) {
    os << net.node(e.source).id << ',' << net.node(e.target).id << ','
       << format_double(e.weight) << '\n';
  }
}

void write_metrics_csv(std::ostream& os, const OwnershipNetwork& net,
                       const MetricsTable& metrics) {
  os << "id,k_in,k_out,strength,s,h,p,c\n";
  for (NodeIndex i = 0; i < net.node_count(); ++i) {
    os << net.node(i).id << ',' << metrics.k_in[i] << ',' << metrics.k_out[i] << ','
       << format_double(metrics.strength[i]) << ',';
    if (metrics.has_s(i)) os << format_double(metrics.s[i]);
    os << ',' << format_double(metrics.h[i]) << ',' << format_double(metrics.p[i]) << ','
       << format_double(metrics.c[i]) << '\n';
  }
}

void write_curve_csv(std::ostream& os, const CumulativeControlCurve& curve) {
  os << "eta,theta\n";
  for (std::size_t k = 0; k < curve.steps(); ++k)
    os << format_double(curve.eta[k]) << ',' << format_double(curve.theta[k]) << '\n';
}

void write_integrate_csv(std::ostream& os, const OwnershipNetwork& net,
                         std::span<const double> ctilde, std::span<const double> phi) {
  os << "id,c_tilde,phi\n";
  for (NodeIndex i = 0; i < net.node_count(); ++i)
    os << net.node(i).id << ',' << format_double(ctilde[i]) << ',' << format_double(phi[i])
       << '\n';
}

void write_matrix_csv(std::ostream& os, const OwnershipNetwork& net,
                      std::span<const MatrixEntry> entries) {
  os << "i,j,value\n";
  for (const MatrixEntry& e : entries)
    os << net.node(e.owner).id << ',' << net.node(e.owned).id << ','
       << format_double(e.value) << '\n';
}

void write_distribution_csv(std::ostream& os, const DistributionSeries& series,
                            std::string_view metric_name, bool survival) {
  os << "# metric=" << metric_name << " samples=" << series.sample_count
     << " ones=" << series.ones_count << '\n';
  if (survival) {
    os << "value,survival\n";
    for (auto [x, y] : series.cdf) os << format_double(x) << ',' << format_double(y) << '\n';
  } else {
    os << "value,density\n";
    for (auto [x, y] : series.pdf) os << format_double(x) << ',' << format_double(y) << '\n';
  }
}

namespace {

ordered_json id_array(const OwnershipNetwork& net, std::span<const NodeIndex> nodes) {
  ordered_json arr = ordered_json::array();
  for (NodeIndex v : nodes) arr.push_back(net.node(v).id);
  return arr;
}

ordered_json json_or_null(double v) {
  if (std::isnan(v)) return nullptr;
  return v;
}

}  // namespace

std::string bowties_json(const OwnershipNetwork& net, std::span<const BowTie> bowties) {
  ordered_json doc;
  doc["bowties"] = ordered_json::array();
  for (const BowTie& bt : bowties) {
    ordered_json item;
    item["core"] = id_array(net, bt.core.members);
    item["in"] = id_array(net, bt.in_set);
    item["out"] = id_array(net, bt.out_set);
    item["other"] = id_array(net, bt.other);
    doc["bowties"].push_back(std::move(item));
  }
  return doc.dump(2) + "\n";
}

namespace {

ordered_json classification_body(const Backbone& backbone, const Classification& cls) {
  ordered_json body;
  body["s_bar"] = cls.s_bar;
  body["h_bar"] = cls.h_bar;
  body["eta_prime"] = json_or_null(cls.eta_prime);
  body["eta_prime_counts"] = json_or_null(cls.eta_prime_counts);
  body["quadrant"] = to_string(cls.quadrant);
  body["n_st"] = backbone.n_st;
  body["n_sh"] = backbone.n_sh;
  body["n_100"] = backbone.n_100;
  body["eta_hat"] = backbone.eta_hat;
  body["theta_achieved"] = backbone.theta_achieved;
  return body;
}

}  // namespace

std::string backbone_json(const OwnershipNetwork& net, const Backbone& backbone,
                          const Classification& cls) {
  ordered_json doc;
  doc["power_holders"] = id_array(net, backbone.power_holders);
  doc["stocks"] = id_array(net, backbone.stocks);
  doc["edges"] = ordered_json::array();
  for (const Edge& e : backbone.edges) {
    ordered_json item;
    item["source"] = net.node(e.source).id;
    item["target"] = net.node(e.target).id;
    item["weight"] = e.weight;
    doc["edges"].push_back(std::move(item));
  }
  doc["delta"] = backbone.delta_used;
  doc["theta_hat"] = backbone.theta_hat_used;
  doc["classification"] = classification_body(backbone, cls);
  return doc.dump(2) + "\n";
}

std::string classification_json(const Backbone& backbone, const Classification& cls) {
  return classification_body(backbone, cls).dump(2) + "\n";
}

std::string subnetwork_json(const OwnershipNetwork& net, const SubNetwork& sub) {
  ordered_json doc;
  doc["seeds"] = id_array(net, sub.seeds);
  doc["nodes"] = id_array(net, sub.nodes);
  doc["edges"] = ordered_json::array();
  for (const MatrixEntry& e : sub.edges) {
    ordered_json item;
    item["source"] = net.node(e.owner).id;
    item["target"] = net.node(e.owned).id;
    item["weight"] = e.value;
    doc["edges"].push_back(std::move(item));
  }
  return doc.dump(2) + "\n";
}

namespace {

bool plain_dot_id(std::string_view id) {
  if (id.empty()) return false;
  if (id.front() >= '0' && id.front() <= '9') return false;
  for (char c : id) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                    (c >= '0' && c <= '9') || c == '_';
    if (!ok) return false;
  }
  return true;
}

std::string dot_id(std::string_view id) {
  if (plain_dot_id(id)) return std::string(id);
  std::string out = "\"";
  for (char c : id) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  out += '"';
  return out;
}

std::string fixed2(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

}  // namespace

std::string export_dot(const OwnershipNetwork& net, std::span<const NodeIndex> nodes,
                       std::span<const Edge> edges) {
  if (nodes.empty()) throw EmptySubnetworkError("cannot export an empty subnetwork");

  std::vector<NodeIndex> ordered(nodes.begin(), nodes.end());
  std::sort(ordered.begin(), ordered.end(), [&](NodeIndex a, NodeIndex b) {
    return net.node(a).id < net.node(b).id;
  });
  std::vector<Edge> sorted_edges(edges.begin(), edges.end());
  std::sort(sorted_edges.begin(), sorted_edges.end(), [&](const Edge& a, const Edge& b) {
    if (net.node(a.source).id != net.node(b.source).id)
      return net.node(a.source).id < net.node(b.source).id;
    return net.node(a.target).id < net.node(b.target).id;
  });

  std::string out = "digraph ownership {\n";
  for (NodeIndex v : ordered) {
    const Node& n = net.node(v);
    out += "  " + dot_id(n.id);
    if (n.kind == NodeKind::Firm)
      out += " [shape=box, label=\"" + n.id + "\\n" + fixed2(n.value) + "\"]";
    else
      out += " [shape=ellipse]";
    out += ";\n";
  }
  for (const Edge& e : sorted_edges) {
    out += "  " + dot_id(net.node(e.source).id) + " -> " + dot_id(net.node(e.target).id) +
           " [label=\"" + fixed2(e.weight * 100.0) + "\"];\n";
  }
  out += "}\n";
  return out;
}

std::string export_backbone_dot(const OwnershipNetwork& net, const Backbone& backbone) {
  std::vector<NodeIndex> nodes;
  std::vector<char> seen(net.node_count(), 0);
  for (NodeIndex v : backbone.power_holders)
    if (!seen[v]) {
      seen[v] = 1;
      nodes.push_back(v);
    }
  for (NodeIndex v : backbone.stocks)
    if (!seen[v]) {
      seen[v] = 1;
      nodes.push_back(v);
    }
  return export_dot(net, nodes, backbone.edges);
}

}  // namespace flowspine
