#include "flowspine/pipeline.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "flowspine/errors.hpp"
#include "flowspine/io.hpp"
#include "flowspine/topology.hpp"

namespace flowspine {

LogLevel log_level() {
  const char* env = std::getenv("FLOWSPINE_LOG");
  if (!env) return LogLevel::Quiet;
  std::string v(env);
  if (v == "debug") return LogLevel::Debug;
  if (v == "info") return LogLevel::Info;
  return LogLevel::Quiet;
}

namespace {

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path + "'");
  out << text;
}

template <typename Fn>
void write_stream_file(const std::string& path, Fn&& fn) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path + "'");
  fn(out);
}

void log_warnings(const std::vector<std::string>& warnings) {
  if (log_level() < LogLevel::Info) return;
  for (const std::string& w : warnings) std::cerr << "flowspine: warning: " << w << "\n";
}

}  // namespace

PipelineResult run_pipeline(const RunConfig& config) {
  if (!(config.delta > 0.0 && config.delta < 1.0))
    throw BadThresholdError("delta must lie in (0, 1)");
  if (!(config.theta_hat > 0.0 && config.theta_hat <= 1.0))
    throw BadThresholdError("theta must lie in (0, 1]");
  if (!std::filesystem::exists(config.nodes_path))
    throw Error("nodes file '" + config.nodes_path + "' does not exist");
  if (!std::filesystem::exists(config.edges_path))
    throw Error("edges file '" + config.edges_path + "' does not exist");

  PipelineResult result;

  auto node_records = read_nodes_csv(config.nodes_path);
  auto edge_records = read_edges_csv(config.edges_path, config.percent);
  OwnershipNetwork raw = load_network(node_records, edge_records, &result.warnings);
  result.network = normalize_ownership(raw, &result.warnings);
  const OwnershipNetwork& net = result.network;

  result.validation = validate(net);
  for (const ValidationIssue& issue : result.validation.violations)
    result.warnings.push_back("validation: " + issue.message);
  log_warnings(result.warnings);

  result.metrics = compute_metrics(net, config.model);

  std::vector<double> values(net.node_count());
  for (NodeIndex i = 0; i < net.node_count(); ++i) values[i] = net.node(i).value;

  // The integrated control value equals the steady-state inflow on the
  // control matrix, so the vector solve is enough; no dense matrix needed.
  PropagationMatrix control = PropagationMatrix::control(net, result.metrics);
  FlowResult control_flow;
  try {
    control_flow = flow_steady_state(control, values, config.solve);
  } catch (const FrobeniusViolationError& err) {
    std::string msg = "integrated model rejected: " + std::string(err.what());
    for (const auto& comp : err.components) {
      msg += "; component {";
      for (std::size_t k = 0; k < comp.size(); ++k) {
        if (k) msg += ", ";
        msg += net.node(comp[k]).id;
      }
      msg += "}";
    }
    throw Error(msg);
  }
  result.ctilde = control_flow.phi;
  if (log_level() >= LogLevel::Debug)
    std::cerr << "flowspine: control solve took " << control_flow.iterations
              << " iterations, residual " << control_flow.residual << "\n";

  PropagationMatrix ownership = PropagationMatrix::ownership(net);
  result.phi = flow_steady_state(ownership, values, config.solve).phi;

  std::vector<NodeIndex> ranking = rank_shareholders(net, result.ctilde);
  result.curve = cumulative_control_curve(net, ranking, config.delta);
  result.backbone =
      extract_backbone(net, result.metrics, result.ctilde, config.delta, config.theta_hat);
  result.classification = classify(result.backbone, config.split_s, config.split_h);

  if (!config.metrics_csv.empty())
    write_stream_file(config.metrics_csv,
                      [&](std::ostream& os) { write_metrics_csv(os, net, result.metrics); });
  if (!config.bowtie_json_path.empty()) {
    auto bowties = list_bowties(net);
    write_text_file(config.bowtie_json_path, bowties_json(net, bowties));
  }
  if (!config.integrate_csv.empty())
    write_stream_file(config.integrate_csv, [&](std::ostream& os) {
      write_integrate_csv(os, net, result.ctilde, result.phi);
    });
  if (!config.curve_csv.empty())
    write_stream_file(config.curve_csv,
                      [&](std::ostream& os) { write_curve_csv(os, result.curve); });
  if (!config.backbone_json_path.empty())
    write_text_file(config.backbone_json_path,
                    backbone_json(net, result.backbone, result.classification));
  if (!config.classify_json_path.empty())
    write_text_file(config.classify_json_path,
                    classification_json(result.backbone, result.classification));
  if (!config.backbone_dot_path.empty()) {
    const std::size_t size =
        result.backbone.power_holders.size() + result.backbone.stocks.size();
    if (size > config.dot_node_limit && !config.force_dot)
      throw Error("backbone has " + std::to_string(size) +
                  " nodes; DOT export is limited to " +
                  std::to_string(config.dot_node_limit) + " (use --force-dot to override)");
    write_text_file(config.backbone_dot_path, export_backbone_dot(net, result.backbone));
  }
  return result;
}

}  // namespace flowspine
