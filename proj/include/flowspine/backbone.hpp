#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "flowspine/metrics.hpp"
#include "flowspine/network.hpp"
#include "flowspine/propagation.hpp"

namespace flowspine {

/// Shareholders (nodes with at least one out-edge) ordered by descending
/// integrated control value; ties broken by ascending node id.
std::vector<NodeIndex> rank_shareholders(const OwnershipNetwork& net,
                                         std::span<const double> ctilde);

/// Lorenz-style cumulative control curve. Point n describes the top-n
/// shareholders of the ranking: eta = n / n_tot against theta, the fraction
/// of total market value they individually or cumulatively control.
class CumulativeControlCurve {
 public:
  std::vector<NodeIndex> ranking;
  std::vector<double> eta;    // n / n_tot
  std::vector<double> theta;  // v_cu(n) / v_tot
  std::vector<double> v_cu;
  double v_tot = 0.0;
  double delta = 0.5;

  std::size_t steps() const { return eta.size(); }

  /// Stocks a single top-n holder owns above delta.
  std::vector<NodeIndex> u_in_at(std::size_t n) const;

  /// Stocks controlled only jointly by the top-n holders.
  std::vector<NodeIndex> u_cu_at(std::size_t n) const;

  /// 1-based step at which a stock first became controlled; 0 = never.
  std::uint32_t controlled_at(NodeIndex stock) const { return cu_step_[stock]; }

 private:
  friend CumulativeControlCurve cumulative_control_curve(const OwnershipNetwork&,
                                                         std::span<const NodeIndex>, double);
  std::vector<std::uint32_t> in_step_;  // first step with a single holder above delta
  std::vector<std::uint32_t> cu_step_;  // first step with summed ownership above delta
};

CumulativeControlCurve cumulative_control_curve(const OwnershipNetwork& net,
                                                std::span<const NodeIndex> ranking,
                                                double delta = 0.5);

/// Pruned subnetwork of power-holders and the stocks they control, plus the
/// classification scalars derived from it.
struct Backbone {
  std::vector<NodeIndex> power_holders;  // surviving, in ranking order
  std::vector<NodeIndex> stocks;         // surviving portfolio stocks, id order
  std::vector<Edge> edges;               // pruned induced ownership edges

  std::size_t n_sh = 0;  // power_holders.size()
  std::size_t n_st = 0;  // stocks.size()

  std::size_t consumed = 0;  // shareholders taken from the ranking
  double eta_hat = 0.0;      // consumed / n_tot
  double theta_achieved = 0.0;

  double s_bar = 0.0;
  double h_bar = 0.0;
  std::size_t n_100 = 0;            // smallest prefix controlling all value; 0 if never
  double eta_prime = 0.0;           // eta_hat / n_100 (fraction over count, as defined)
  double eta_prime_counts = 0.0;    // consumed / n_100 (count over count variant)

  double delta_used = 0.5;
  double theta_hat_used = 0.8;
};

/// Consumes the ranking until the controlled portfolio value reaches
/// theta_hat * v_tot, then prunes each controlled stock down to its
/// round(s_j) largest in-edges and drops isolated nodes.
Backbone extract_backbone(const OwnershipNetwork& net, const MetricsTable& metrics,
                          std::span<const double> ctilde, double delta = 0.5,
                          double theta_hat = 0.8);

enum class Quadrant : std::uint8_t { A, B, C, D, Mixed };

const char* to_string(Quadrant q);

struct Classification {
  double s_bar = 0.0;
  double h_bar = 0.0;
  double eta_prime = 0.0;
  double eta_prime_counts = 0.0;
  Quadrant quadrant = Quadrant::Mixed;
};

/// Places ln(s_bar) and ln(h_bar) against the split points. Points within
/// `margin` of a split are reported as Mixed.
Classification classify(const Backbone& backbone, double split_s = 0.0, double split_h = 0.0,
                        double margin = 0.0);

/// Generic flow backbone: the smallest phi-ranked prefix carrying a
/// theta_hat share of total flow, plus all direct and indirect successors.
struct SubNetwork {
  std::vector<NodeIndex> nodes;      // sorted ascending
  std::vector<MatrixEntry> edges;    // induced entries
  std::vector<NodeIndex> seeds;      // the ranked prefix
};

SubNetwork flow_backbone(const PropagationMatrix& w, std::span<const double> values,
                         double theta_hat, const SolveOptions& opts = {});

/// Idealized ownership topologies spanning the map of control. E marks the
/// excluded region and is rejected.
enum class IdealTopology : std::uint8_t { A, B, C, D, E };

IdealTopology parse_topology(std::string_view name);

OwnershipNetwork generate_idealized(IdealTopology topology, std::size_t n_stocks,
                                    std::size_t n_holders, std::uint64_t seed);

}  // namespace flowspine
