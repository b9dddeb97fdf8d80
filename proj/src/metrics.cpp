#include "flowspine/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "flowspine/errors.hpp"

namespace flowspine {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

// Index of the unique holder above the threshold, or -1 when there is no
// controller under the fixed-threshold model.
int threshold_controller(std::span<const double> weights, double t) {
  int found = -1;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] > t) {
      if (found >= 0) return -1;
      found = static_cast<int>(i);
    }
  }
  return found;
}

}  // namespace

ControlModel ControlModel::with_threshold(double t) {
  if (t != 0.1 && t != 0.2 && t != 0.5)
    throw BadThresholdError("threshold control model supports t in {0.1, 0.2, 0.5}");
  return ControlModel{ControlModelKind::Threshold, t};
}

double concentration_index(std::span<const double> in_weights) {
  if (in_weights.empty())
    throw NoInEdgesError("concentration index is undefined without in-edges");
  double sum = 0.0, sum_sq = 0.0;
  for (double w : in_weights) {
    sum += w;
    sum_sq += w * w;
  }
  return (sum * sum) / sum_sq;
}

std::vector<double> control_fractions(std::span<const double> in_weights,
                                      const ControlModel& model) {
  std::vector<double> out(in_weights.size(), 0.0);
  if (in_weights.empty()) return out;

  if (model.kind == ControlModelKind::Threshold) {
    int c = threshold_controller(in_weights, model.threshold);
    if (c >= 0) out[static_cast<std::size_t>(c)] = 1.0;
    return out;
  }

  double sum_sq = 0.0;
  for (double w : in_weights) sum_sq += w * w;
  for (std::size_t i = 0; i < in_weights.size(); ++i)
    out[i] = in_weights[i] * in_weights[i] / sum_sq;
  return out;
}

double control_fraction(double weight, std::span<const double> in_weights,
                        const ControlModel& model) {
  auto it = std::find(in_weights.begin(), in_weights.end(), weight);
  if (it == in_weights.end())
    throw WeightNotIncidentError("weight is not among the stock's in-weights");
  auto fractions = control_fractions(in_weights, model);
  return fractions[static_cast<std::size_t>(it - in_weights.begin())];
}

bool MetricsTable::has_s(NodeIndex i) const { return !std::isnan(s[i]); }

MetricsTable compute_metrics(const OwnershipNetwork& net, const ControlModel& model) {
  const std::size_t n = net.node_count();
  MetricsTable t;
  t.k_in.resize(n);
  t.k_out.resize(n);
  t.strength.assign(n, 0.0);
  t.s.assign(n, kNan);
  t.h.assign(n, 0.0);
  t.p.assign(n, 0.0);
  t.c.assign(n, 0.0);
  t.edge_control.assign(net.edge_count(), 0.0);

  std::vector<double> weights;
  for (NodeIndex j = 0; j < n; ++j) {
    t.k_in[j] = static_cast<std::uint32_t>(net.in_degree(j));
    t.k_out[j] = static_cast<std::uint32_t>(net.out_degree(j));

    auto ids = net.in_edge_ids(j);
    if (ids.empty()) continue;
    weights.clear();
    for (EdgeId e : ids) weights.push_back(net.edges()[e].weight);

    t.s[j] = concentration_index(weights);

    auto fractions = control_fractions(weights, model);
    for (std::size_t k = 0; k < ids.size(); ++k) t.edge_control[ids[k]] = fractions[k];
  }

  for (NodeIndex i = 0; i < n; ++i) {
    double strength = 0.0, h = 0.0, p = 0.0, c = 0.0;
    auto span = net.out_edges(i);
    const EdgeId base = static_cast<EdgeId>(span.data() - net.edges().data());
    for (std::size_t k = 0; k < span.size(); ++k) {
      const Edge& e = span[k];
      const double control = t.edge_control[base + k];
      strength += e.weight;
      h += control;
      p += e.weight * net.node(e.target).value;
      c += control * net.node(e.target).value;
    }
    t.strength[i] = strength;
    t.h[i] = h;
    t.p[i] = p;
    t.c[i] = c;
  }
  return t;
}

Metric parse_metric(std::string_view name) {
  if (name == "s") return Metric::ConcentrationIndex;
  if (name == "h") return Metric::ControlIndex;
  if (name == "k_out") return Metric::OutDegree;
  throw UnknownMetricError("unknown metric '" + std::string(name) + "'; expected s, h or k_out");
}

DistributionSeries distribution_export(const OwnershipNetwork& net, const MetricsTable& metrics,
                                       Metric metric, std::size_t bins) {
  std::vector<double> samples;
  const std::size_t n = net.node_count();
  switch (metric) {
    case Metric::ConcentrationIndex:
      for (NodeIndex j = 0; j < n; ++j)
        if (metrics.has_s(j)) samples.push_back(metrics.s[j]);
      break;
    case Metric::ControlIndex:
      for (NodeIndex i = 0; i < n; ++i)
        if (metrics.k_out[i] > 0) samples.push_back(metrics.h[i]);
      break;
    case Metric::OutDegree:
      for (NodeIndex i = 0; i < n; ++i)
        if (metrics.k_out[i] > 0) samples.push_back(static_cast<double>(metrics.k_out[i]));
      break;
  }

  DistributionSeries series;
  series.sample_count = samples.size();
  for (double x : samples)
    if (x == 1.0) ++series.ones_count;
  if (samples.empty()) return series;

  std::sort(samples.begin(), samples.end());
  const double lo = samples.front();
  const double hi = samples.back();
  const std::size_t count = samples.size();

  // Survival form: fraction of samples >= x, one point per distinct value.
  for (std::size_t i = 0; i < count;) {
    std::size_t j = i;
    while (j < count && samples[j] == samples[i]) ++j;
    series.cdf.emplace_back(samples[i],
                            static_cast<double>(count - i) / static_cast<double>(count));
    i = j;
  }

  if (lo == hi || bins == 0) {
    series.pdf.emplace_back(lo, 1.0);
    return series;
  }

  // Geometric bins over [lo, hi]; only occupied bins are emitted.
  const double ratio = std::pow(hi / lo, 1.0 / static_cast<double>(bins));
  std::vector<std::size_t> counts(bins, 0);
  for (double x : samples) {
    auto k = static_cast<std::size_t>(std::floor(std::log(x / lo) / std::log(ratio)));
    if (k >= bins) k = bins - 1;
    ++counts[k];
  }
  for (std::size_t k = 0; k < bins; ++k) {
    if (counts[k] == 0) continue;
    const double left = lo * std::pow(ratio, static_cast<double>(k));
    const double right = lo * std::pow(ratio, static_cast<double>(k + 1));
    const double center = std::sqrt(left * right);
    const double density =
        static_cast<double>(counts[k]) / (static_cast<double>(count) * (right - left));
    series.pdf.emplace_back(center, density);
  }
  return series;
}

}  // namespace flowspine
