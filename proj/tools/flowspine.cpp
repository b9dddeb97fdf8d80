// Command-line front end: backbone extraction and control analysis for
// ownership networks stored as node/edge CSV files.

#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "flowspine/backbone.hpp"
#include "flowspine/errors.hpp"
#include "flowspine/io.hpp"
#include "flowspine/metrics.hpp"
#include "flowspine/network.hpp"
#include "flowspine/pipeline.hpp"
#include "flowspine/propagation.hpp"
#include "flowspine/topology.hpp"

namespace {

using namespace flowspine;

struct CommonArgs {
  std::string nodes_path;
  std::string edges_path;
  bool percent = false;
  std::string model = "quadratic";
  std::string method = "auto";
  double tol = 1e-10;
  std::size_t max_iter = 1000000;
};

void add_input_options(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--nodes", args.nodes_path, "node CSV (id,kind,value)")->required();
  cmd->add_option("--edges", args.edges_path, "edge CSV (source,target,weight)")->required();
  cmd->add_flag("--percent", args.percent, "weights are percentages; divide by 100");
}

void add_model_option(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--model", args.model, "control model: quadratic | threshold:<0.1|0.2|0.5>");
}

void add_solver_options(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--method", args.method, "solver: auto | direct | fixed-point");
  cmd->add_option("--tol", args.tol, "fixed-point convergence tolerance");
  cmd->add_option("--max-iter", args.max_iter, "fixed-point iteration cap");
}

ControlModel parse_model(const std::string& text) {
  if (text == "quadratic") return ControlModel::quadratic();
  if (text.rfind("threshold:", 0) == 0)
    return ControlModel::with_threshold(std::stod(text.substr(10)));
  throw Error("unknown control model '" + text + "'");
}

SolveOptions parse_solver(const CommonArgs& args) {
  SolveOptions opts;
  opts.tol = args.tol;
  opts.max_iter = args.max_iter;
  if (args.method == "auto")
    opts.method = SolveMethod::Auto;
  else if (args.method == "direct")
    opts.method = SolveMethod::Direct;
  else if (args.method == "fixed-point")
    opts.method = SolveMethod::FixedPoint;
  else
    throw Error("unknown method '" + args.method + "'");
  return opts;
}

OwnershipNetwork load_normalized(const CommonArgs& args, std::vector<std::string>* warnings) {
  auto nodes = read_nodes_csv(args.nodes_path);
  auto edges = read_edges_csv(args.edges_path, args.percent);
  OwnershipNetwork raw = load_network(nodes, edges, warnings);
  return normalize_ownership(raw, warnings);
}

void report_warnings(const std::vector<std::string>& warnings) {
  if (log_level() < LogLevel::Info) return;
  for (const std::string& w : warnings) std::cerr << "flowspine: warning: " << w << "\n";
}

void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path + "'");
  out << text;
}

template <typename Fn>
void emit_stream(const std::string& path, Fn&& fn) {
  if (path.empty() || path == "-") {
    fn(std::cout);
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path + "'");
  fn(out);
}

std::vector<double> node_values(const OwnershipNetwork& net) {
  std::vector<double> v(net.node_count());
  for (NodeIndex i = 0; i < net.node_count(); ++i) v[i] = net.node(i).value;
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"backbone extraction and control analysis for ownership networks"};
  app.require_subcommand(1);

  CommonArgs args;
  std::string out_path;      // "-" = stdout
  std::string dot_path;
  std::string curve_out;
  double delta = 0.5;
  double theta = 0.8;
  double split_s = 0.0;
  double split_h = 0.0;
  bool force_dot = false;
  bool emit_matrix = false;
  std::string matrix_path = "htilde.csv";

  auto* analyze = app.add_subcommand("analyze", "per-node metrics CSV");
  add_input_options(analyze, args);
  add_model_option(analyze, args);
  analyze->add_option("--out", out_path, "output path (default stdout)");

  auto* bowtie = app.add_subcommand("bowtie", "bow-tie decomposition JSON");
  add_input_options(bowtie, args);
  bowtie->add_option("--out", out_path, "output path (default stdout)");

  auto* integrate_cmd = app.add_subcommand("integrate", "integrated control and flow CSV");
  add_input_options(integrate_cmd, args);
  add_model_option(integrate_cmd, args);
  add_solver_options(integrate_cmd, args);
  integrate_cmd->add_option("--out", out_path, "output path (default stdout)");
  integrate_cmd->add_flag("--emit-matrix", emit_matrix, "also write the integrated matrix");
  integrate_cmd->add_option("--matrix-out", matrix_path, "integrated matrix path");

  auto* curve_cmd = app.add_subcommand("curve", "cumulative control curve CSV");
  add_input_options(curve_cmd, args);
  add_model_option(curve_cmd, args);
  add_solver_options(curve_cmd, args);
  curve_cmd->add_option("--delta", delta, "cumulative control threshold");
  curve_cmd->add_option("--out", out_path, "output path (default stdout)");

  std::string format = "json";
  auto* backbone_cmd = app.add_subcommand("backbone", "extract the backbone");
  add_input_options(backbone_cmd, args);
  add_model_option(backbone_cmd, args);
  add_solver_options(backbone_cmd, args);
  backbone_cmd->add_option("--delta", delta, "cumulative control threshold");
  backbone_cmd->add_option("--theta", theta, "controlled market value fraction");
  backbone_cmd->add_option("--out", out_path, "backbone path (default stdout)");
  backbone_cmd->add_option("--format", format, "main output format: json | dot");
  backbone_cmd->add_option("--dot", dot_path, "also write a DOT rendering");
  backbone_cmd->add_option("--curve-out", curve_out, "also write the curve CSV");
  backbone_cmd->add_flag("--force-dot", force_dot, "export DOT even for huge backbones");

  auto* classify_cmd = app.add_subcommand("classify", "backbone classification JSON");
  add_input_options(classify_cmd, args);
  add_model_option(classify_cmd, args);
  add_solver_options(classify_cmd, args);
  classify_cmd->add_option("--delta", delta, "cumulative control threshold");
  classify_cmd->add_option("--theta", theta, "controlled market value fraction");
  classify_cmd->add_option("--split-s", split_s, "ln(s_bar) split point");
  classify_cmd->add_option("--split-h", split_h, "ln(h_bar) split point");
  classify_cmd->add_option("--out", out_path, "output path (default stdout)");

  auto* flow_cmd = app.add_subcommand("flow-backbone", "generic flow backbone JSON");
  add_input_options(flow_cmd, args);
  add_solver_options(flow_cmd, args);
  flow_cmd->add_option("--theta", theta, "fraction of total flow");
  flow_cmd->add_option("--out", out_path, "output path (default stdout)");
  flow_cmd->add_option("--format", format, "main output format: json | dot");
  flow_cmd->add_option("--dot", dot_path, "also write a DOT rendering");
  flow_cmd->add_flag("--force-dot", force_dot, "export DOT even for huge subnetworks");

  std::string topology = "A";
  std::size_t gen_stocks = 10;
  std::size_t gen_holders = 10;
  std::uint64_t seed = 0;
  std::string gen_nodes = "nodes.csv";
  std::string gen_edges = "edges.csv";
  auto* generate_cmd = app.add_subcommand("generate", "write an idealized topology");
  generate_cmd->add_option("--topology", topology, "A | B | C | D")->required();
  generate_cmd->add_option("--stocks", gen_stocks, "number of stocks");
  generate_cmd->add_option("--holders", gen_holders, "number of holders");
  generate_cmd->add_option("--seed", seed, "value generator seed");
  generate_cmd->add_option("--nodes-out", gen_nodes, "node CSV path");
  generate_cmd->add_option("--edges-out", gen_edges, "edge CSV path");

  std::string metric_name = "s";
  std::size_t bins = 20;
  std::string prefix = "dist";
  auto* dist_cmd = app.add_subcommand("distributions", "PDF/CDF series for s, h or k_out");
  add_input_options(dist_cmd, args);
  add_model_option(dist_cmd, args);
  dist_cmd->add_option("--metric", metric_name, "s | h | k_out");
  dist_cmd->add_option("--bins", bins, "number of log bins");
  dist_cmd->add_option("--out-prefix", prefix, "output prefix; writes <prefix>.{pdf,cdf}.csv");

  CLI11_PARSE(app, argc, argv);

  try {
    std::vector<std::string> warnings;

    if (*analyze) {
      OwnershipNetwork net = load_normalized(args, &warnings);
      report_warnings(warnings);
      MetricsTable metrics = compute_metrics(net, parse_model(args.model));
      emit_stream(out_path, [&](std::ostream& os) { write_metrics_csv(os, net, metrics); });
    } else if (*bowtie) {
      OwnershipNetwork net = load_normalized(args, &warnings);
      report_warnings(warnings);
      auto bowties = list_bowties(net);
      emit(out_path, bowties_json(net, bowties));
    } else if (*integrate_cmd) {
      OwnershipNetwork net = load_normalized(args, &warnings);
      report_warnings(warnings);
      MetricsTable metrics = compute_metrics(net, parse_model(args.model));
      SolveOptions solve = parse_solver(args);
      auto values = node_values(net);
      PropagationMatrix control = PropagationMatrix::control(net, metrics);
      PropagationMatrix ownership = PropagationMatrix::ownership(net);
      auto ctilde = flow_steady_state(control, values, solve).phi;
      auto phi = flow_steady_state(ownership, values, solve).phi;
      emit_stream(out_path,
                  [&](std::ostream& os) { write_integrate_csv(os, net, ctilde, phi); });
      if (emit_matrix) {
        IntegratedResult integrated = integrate(control, solve);
        emit_stream(matrix_path,
                    [&](std::ostream& os) { write_matrix_csv(os, net, integrated.entries); });
      }
    } else if (*curve_cmd) {
      OwnershipNetwork net = load_normalized(args, &warnings);
      report_warnings(warnings);
      MetricsTable metrics = compute_metrics(net, parse_model(args.model));
      auto values = node_values(net);
      PropagationMatrix control = PropagationMatrix::control(net, metrics);
      auto ctilde = flow_steady_state(control, values, parse_solver(args)).phi;
      auto ranking = rank_shareholders(net, ctilde);
      auto curve = cumulative_control_curve(net, ranking, delta);
      emit_stream(out_path, [&](std::ostream& os) { write_curve_csv(os, curve); });
    } else if (*backbone_cmd || *classify_cmd) {
      RunConfig config;
      config.nodes_path = args.nodes_path;
      config.edges_path = args.edges_path;
      config.percent = args.percent;
      config.model = parse_model(args.model);
      config.solve = parse_solver(args);
      config.delta = delta;
      config.theta_hat = theta;
      config.split_s = split_s;
      config.split_h = split_h;
      config.force_dot = force_dot;
      if (*backbone_cmd) {
        config.backbone_dot_path = dot_path;
        config.curve_csv = curve_out;
      }
      PipelineResult result = run_pipeline(config);
      if (*classify_cmd) {
        emit(out_path, classification_json(result.backbone, result.classification));
      } else if (format == "dot") {
        const std::size_t size =
            result.backbone.power_holders.size() + result.backbone.stocks.size();
        if (size > config.dot_node_limit && !force_dot)
          throw Error("backbone has " + std::to_string(size) +
                      " nodes; DOT export is limited to " +
                      std::to_string(config.dot_node_limit) +
                      " (use --force-dot to override)");
        emit(out_path, export_backbone_dot(result.network, result.backbone));
      } else if (format == "json") {
        emit(out_path, backbone_json(result.network, result.backbone, result.classification));
      } else {
        throw Error("unknown format '" + format + "'; expected json or dot");
      }
    } else if (*flow_cmd) {
      OwnershipNetwork net = load_normalized(args, &warnings);
      report_warnings(warnings);
      auto values = node_values(net);
      PropagationMatrix ownership = PropagationMatrix::ownership(net);
      SubNetwork sub = flow_backbone(ownership, values, theta, parse_solver(args));
      std::vector<Edge> edges;
      for (const MatrixEntry& e : sub.edges) edges.push_back({e.owner, e.owned, e.value});
      auto guarded_dot = [&]() {
        if (sub.nodes.size() > 5000 && !force_dot)
          throw Error("subnetwork has " + std::to_string(sub.nodes.size()) +
                      " nodes; DOT export is limited to 5000 (use --force-dot to override)");
        return export_dot(net, sub.nodes, edges);
      };
      if (format == "dot")
        emit(out_path, guarded_dot());
      else if (format == "json")
        emit(out_path, subnetwork_json(net, sub));
      else
        throw Error("unknown format '" + format + "'; expected json or dot");
      if (!dot_path.empty()) emit(dot_path, guarded_dot());
    } else if (*generate_cmd) {
      OwnershipNetwork net =
          generate_idealized(parse_topology(topology), gen_stocks, gen_holders, seed);
      emit_stream(gen_nodes, [&](std::ostream& os) { write_nodes_csv(os, net); });
      emit_stream(gen_edges, [&](std::ostream& os) { write_edges_csv(os, net); });
    } else if (*dist_cmd) {
      OwnershipNetwork net = load_normalized(args, &warnings);
      report_warnings(warnings);
      MetricsTable metrics = compute_metrics(net, parse_model(args.model));
      Metric metric = parse_metric(metric_name);
      DistributionSeries series = distribution_export(net, metrics, metric, bins);
      emit_stream(prefix + ".pdf.csv", [&](std::ostream& os) {
        write_distribution_csv(os, series, metric_name, /*survival=*/false);
      });
      emit_stream(prefix + ".cdf.csv", [&](std::ostream& os) {
        write_distribution_csv(os, series, metric_name, /*survival=*/true);
      });
    }
  } catch (const Error& err) {
    std::cerr << "flowspine: error: " << err.what() << "\n";
    return 1;
  } catch (const std::exception& err) {
    std::cerr << "flowspine: internal error: " << err.what() << "\n";
    return 2;
  }
  return 0;
}
