#pragma once

#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "flowspine/network.hpp"

namespace flowspine {

enum class ControlModelKind : std::uint8_t {
  Quadratic,  // squared-weight share; the default model
  Threshold,  // sole control above a fixed cut-off, otherwise nobody controls
};

struct ControlModel {
  ControlModelKind kind = ControlModelKind::Quadratic;
  double threshold = 0.5;

  static ControlModel quadratic() { return {}; }

  /// t must be one of 0.1, 0.2, 0.5.
  static ControlModel with_threshold(double t);
};

/// Effective number of prominent in-edges: (sum w)^2 / sum w^2. Equals the
/// in-degree for equal weights and tends to 1 under single dominance.
double concentration_index(std::span<const double> in_weights);

/// Control fractions for all in-weights of one stock, in input order.
std::vector<double> control_fractions(std::span<const double> in_weights,
                                      const ControlModel& model = {});

/// Control fraction of the holder contributing `weight`, which must be one
/// of the listed in-weights.
double control_fraction(double weight, std::span<const double> in_weights,
                        const ControlModel& model = {});

/// Per-node and per-edge first/second-level measures. Vectors are indexed by
/// NodeIndex; s is NaN where undefined (no in-edges).
struct MetricsTable {
  std::vector<std::uint32_t> k_in;
  std::vector<std::uint32_t> k_out;
  std::vector<double> strength;      // sum of out-edge weights (ownership held)
  std::vector<double> s;             // concentration index; NaN if k_in == 0
  std::vector<double> h;             // control index
  std::vector<double> p;             // portfolio value
  std::vector<double> c;             // control value (direct neighbors only)
  std::vector<double> edge_control;  // H per edge, aligned with net.edges()

  bool has_s(NodeIndex i) const;
};

MetricsTable compute_metrics(const OwnershipNetwork& net, const ControlModel& model = {});

enum class Metric : std::uint8_t { ConcentrationIndex, ControlIndex, OutDegree };

/// Parses "s", "h" or "k_out"; anything else raises UnknownMetricError.
Metric parse_metric(std::string_view name);

/// Log-binned density plus survival-form CDF, ready for log-log plotting.
struct DistributionSeries {
  std::vector<std::pair<double, double>> pdf;  // (geometric bin center, density)
  std::vector<std::pair<double, double>> cdf;  // (value, fraction of samples >= value)
  std::size_t ones_count = 0;                  // samples equal to 1 exactly
  std::size_t sample_count = 0;
};

DistributionSeries distribution_export(const OwnershipNetwork& net, const MetricsTable& metrics,
                                       Metric metric, std::size_t bins = 20);

}  // namespace flowspine
