#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "flowspine/backbone.hpp"
#include "flowspine/metrics.hpp"
#include "flowspine/network.hpp"
#include "flowspine/propagation.hpp"

namespace flowspine {

/// Everything one end-to-end run needs. Output paths left empty are skipped.
struct RunConfig {
  std::string nodes_path;
  std::string edges_path;
  bool percent = false;

  double delta = 0.5;
  double theta_hat = 0.8;
  ControlModel model;
  SolveOptions solve;
  double split_s = 0.0;
  double split_h = 0.0;
  std::uint64_t seed = 0;

  std::string metrics_csv;
  std::string bowtie_json_path;
  std::string integrate_csv;
  std::string curve_csv;
  std::string backbone_json_path;
  std::string backbone_dot_path;
  std::string classify_json_path;

  // Layout tools choke on huge graphs; DOT export refuses beyond this many
  // nodes unless forced.
  std::size_t dot_node_limit = 5000;
  bool force_dot = false;
};

struct PipelineResult {
  OwnershipNetwork network;  // normalized
  ValidationReport validation;
  MetricsTable metrics;
  std::vector<double> ctilde;  // integrated control value per node
  std::vector<double> phi;     // ownership mass inflow per node
  CumulativeControlCurve curve;
  Backbone backbone;
  Classification classification;
  std::vector<std::string> warnings;
};

/// load -> normalize -> validate -> metrics -> integrated control -> curve
/// -> backbone -> classify, writing every requested artifact.
PipelineResult run_pipeline(const RunConfig& config);

/// Log verbosity from the FLOWSPINE_LOG environment variable.
enum class LogLevel : std::uint8_t { Quiet = 0, Info = 1, Debug = 2 };
LogLevel log_level();

}  // namespace flowspine
