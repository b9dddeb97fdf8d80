#include "flowspine/backbone.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "flowspine/errors.hpp"

namespace flowspine {

namespace {

// Relative slack for comparing accumulated values against fractions of the
// total; absorbs summation-order noise only.
constexpr double kFractionSlack = 1e-12;

std::size_t round_half_up(double x) {
  return static_cast<std::size_t>(std::floor(x + 0.5));
}

}  // namespace

std::vector<NodeIndex> rank_shareholders(const OwnershipNetwork& net,
                                         std::span<const double> ctilde) {
  std::vector<NodeIndex> ranking;
  const std::size_t n = net.node_count();
  for (NodeIndex i = 0; i < n; ++i)
    if (net.out_degree(i) > 0) ranking.push_back(i);
  std::sort(ranking.begin(), ranking.end(), [&](NodeIndex a, NodeIndex b) {
    if (ctilde[a] != ctilde[b]) return ctilde[a] > ctilde[b];
    return net.node(a).id < net.node(b).id;
  });
  return ranking;
}

std::vector<NodeIndex> CumulativeControlCurve::u_in_at(std::size_t n) const {
  std::vector<NodeIndex> out;
  for (NodeIndex j = 0; j < in_step_.size(); ++j)
    if (in_step_[j] != 0 && in_step_[j] <= n) out.push_back(j);
  return out;
}

std::vector<NodeIndex> CumulativeControlCurve::u_cu_at(std::size_t n) const {
  std::vector<NodeIndex> out;
  for (NodeIndex j = 0; j < cu_step_.size(); ++j) {
    if (cu_step_[j] == 0 || cu_step_[j] > n) continue;
    // Individually-controlled stocks take precedence; keep the sets disjoint.
    if (in_step_[j] != 0 && in_step_[j] <= n) continue;
    out.push_back(j);
  }
  return out;
}

CumulativeControlCurve cumulative_control_curve(const OwnershipNetwork& net,
                                                std::span<const NodeIndex> ranking,
                                                double delta) {
  if (!(delta > 0.0 && delta < 1.0))
    throw BadThresholdError("control threshold delta must lie in (0, 1)");

  const std::size_t n = net.node_count();
  CumulativeControlCurve curve;
  curve.delta = delta;
  curve.ranking.assign(ranking.begin(), ranking.end());
  curve.v_tot = net.total_value();
  curve.in_step_.assign(n, 0);
  curve.cu_step_.assign(n, 0);

  const double n_tot = static_cast<double>(ranking.size());
  std::vector<double> cum(n, 0.0);
  double v_running = 0.0;

  for (std::size_t k = 0; k < ranking.size(); ++k) {
    const std::uint32_t step = static_cast<std::uint32_t>(k + 1);
    for (const Edge& e : net.out_edges(ranking[k])) {
      const NodeIndex j = e.target;
      if (e.weight > delta && curve.in_step_[j] == 0) curve.in_step_[j] = step;
      const bool was_controlled = cum[j] > delta;
      cum[j] += e.weight;
      if (!was_controlled && cum[j] > delta && curve.cu_step_[j] == 0) {
        curve.cu_step_[j] = step;
        v_running += net.node(j).value;
      }
    }
    curve.eta.push_back(static_cast<double>(step) / n_tot);
    curve.v_cu.push_back(v_running);
    curve.theta.push_back(curve.v_tot > 0.0 ? v_running / curve.v_tot : 0.0);
  }
  return curve;
}

Backbone extract_backbone(const OwnershipNetwork& net, const MetricsTable& metrics,
                          std::span<const double> ctilde, double delta, double theta_hat) {
  if (!(theta_hat > 0.0 && theta_hat <= 1.0))
    throw BadThresholdError("market-value threshold theta_hat must lie in (0, 1]");

  const std::vector<NodeIndex> ranking = rank_shareholders(net, ctilde);
  const CumulativeControlCurve curve = cumulative_control_curve(net, ranking, delta);

  if (ranking.empty())
    throw UnreachableThetaError("network has no shareholders", 0.0);

  const double target = theta_hat * curve.v_tot;
  std::size_t consumed = 0;
  for (std::size_t k = 0; k < curve.steps(); ++k) {
    if (curve.v_cu[k] >= target * (1.0 - kFractionSlack)) {
      consumed = k + 1;
      break;
    }
  }
  if (consumed == 0)
    throw UnreachableThetaError(
        "cumulative control never reaches theta_hat = " + std::to_string(theta_hat) +
            "; maximum achievable is " + std::to_string(curve.theta.back()),
        curve.theta.back());

  const std::size_t n = net.node_count();
  std::vector<char> is_holder(n, 0), is_stock(n, 0), member(n, 0);
  for (std::size_t k = 0; k < consumed; ++k) {
    is_holder[ranking[k]] = 1;
    member[ranking[k]] = 1;
  }
  for (NodeIndex j = 0; j < n; ++j) {
    const std::uint32_t step = curve.controlled_at(j);
    if (step != 0 && step <= consumed) {
      is_stock[j] = 1;
      member[j] = 1;
    }
  }

  // Induced edges, with portfolio stocks cut back to their round(s_j)
  // largest in-weights. Incoming links only; portfolios stay untouched.
  std::vector<Edge> kept;
  std::vector<Edge> incoming;
  for (NodeIndex j = 0; j < n; ++j) {
    if (!member[j]) continue;
    incoming.clear();
    for (EdgeId e : net.in_edge_ids(j)) {
      const Edge& edge = net.edges()[e];
      if (member[edge.source]) incoming.push_back(edge);
    }
    if (incoming.empty()) continue;
    if (is_stock[j]) {
      const std::size_t keep = std::max<std::size_t>(1, round_half_up(metrics.s[j]));
      if (incoming.size() > keep) {
        std::sort(incoming.begin(), incoming.end(), [&](const Edge& a, const Edge& b) {
          if (a.weight != b.weight) return a.weight > b.weight;
          return net.node(a.source).id < net.node(b.source).id;
        });
        incoming.resize(keep);
      }
    }
    kept.insert(kept.end(), incoming.begin(), incoming.end());
  }
  std::sort(kept.begin(), kept.end(), [](const Edge& a, const Edge& b) {
    if (a.source != b.source) return a.source < b.source;
    return a.target < b.target;
  });

  std::vector<char> touched(n, 0);
  for (const Edge& e : kept) {
    touched[e.source] = 1;
    touched[e.target] = 1;
  }

  Backbone bb;
  bb.delta_used = delta;
  bb.theta_hat_used = theta_hat;
  bb.consumed = consumed;
  bb.eta_hat = static_cast<double>(consumed) / static_cast<double>(ranking.size());
  bb.theta_achieved = curve.theta[consumed - 1];
  bb.edges = std::move(kept);

  for (std::size_t k = 0; k < consumed; ++k)
    if (touched[ranking[k]]) bb.power_holders.push_back(ranking[k]);
  for (NodeIndex j = 0; j < n; ++j)
    if (is_stock[j] && touched[j]) bb.stocks.push_back(j);
  std::sort(bb.stocks.begin(), bb.stocks.end(), [&](NodeIndex a, NodeIndex b) {
    return net.node(a).id < net.node(b).id;
  });

  bb.n_sh = bb.power_holders.size();
  bb.n_st = bb.stocks.size();

  double s_sum = 0.0;
  for (NodeIndex j : bb.stocks) s_sum += metrics.s[j];
  bb.s_bar = bb.n_st > 0 ? s_sum / static_cast<double>(bb.n_st) : 0.0;
  bb.h_bar = bb.n_sh > 0 ? static_cast<double>(bb.n_st) / static_cast<double>(bb.n_sh) : 0.0;

  bb.n_100 = 0;
  for (std::size_t k = 0; k < curve.steps(); ++k) {
    if (curve.theta[k] >= 1.0 - kFractionSlack) {
      bb.n_100 = k + 1;
      break;
    }
  }
  if (bb.n_100 > 0) {
    bb.eta_prime = bb.eta_hat / static_cast<double>(bb.n_100);
    bb.eta_prime_counts = static_cast<double>(consumed) / static_cast<double>(bb.n_100);
  } else {
    bb.eta_prime = std::numeric_limits<double>::quiet_NaN();
    bb.eta_prime_counts = std::numeric_limits<double>::quiet_NaN();
  }
  return bb;
}

const char* to_string(Quadrant q) {
  switch (q) {
    case Quadrant::A: return "A";
    case Quadrant::B: return "B";
    case Quadrant::C: return "C";
    case Quadrant::D: return "D";
    case Quadrant::Mixed: return "mixed";
  }
  return "mixed";
}

Classification classify(const Backbone& backbone, double split_s, double split_h,
                        double margin) {
  if (backbone.n_st == 0 || backbone.n_sh == 0)
    throw EmptyBackboneError("backbone has no stocks or no shareholders");

  Classification cls;
  cls.s_bar = backbone.s_bar;
  cls.h_bar = backbone.h_bar;
  cls.eta_prime = backbone.eta_prime;
  cls.eta_prime_counts = backbone.eta_prime_counts;

  const double x = std::log(backbone.s_bar);
  const double y = std::log(backbone.h_bar);
  if (margin > 0.0 &&
      (std::abs(x - split_s) < margin || std::abs(y - split_h) < margin)) {
    cls.quadrant = Quadrant::Mixed;
    return cls;
  }

  // Sole ownership pins ln(s_bar) to the split itself, so the low side is
  // closed: dispersion has to strictly exceed the split to count.
  const bool dispersed_local = x > split_s;
  const bool concentrated_global = y > split_h;
  if (dispersed_local)
    cls.quadrant = concentrated_global ? Quadrant::B : Quadrant::C;
  else
    cls.quadrant = concentrated_global ? Quadrant::D : Quadrant::A;
  return cls;
}

SubNetwork flow_backbone(const PropagationMatrix& w, std::span<const double> values,
                         double theta_hat, const SolveOptions& opts) {
  if (!(theta_hat > 0.0 && theta_hat <= 1.0))
    throw BadThresholdError("flow threshold theta_hat must lie in (0, 1]");

  const FlowResult flow = flow_steady_state(w, values, opts);
  const std::size_t n = w.size();

  std::vector<NodeIndex> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = static_cast<NodeIndex>(i);
  std::sort(order.begin(), order.end(), [&](NodeIndex a, NodeIndex b) {
    if (flow.phi[a] != flow.phi[b]) return flow.phi[a] > flow.phi[b];
    return a < b;
  });

  double phi_tot = 0.0;
  for (double v : flow.phi) phi_tot += v;

  SubNetwork sub;
  if (phi_tot <= 0.0) return sub;

  const double target = theta_hat * phi_tot;
  double acc = 0.0;
  for (NodeIndex v : order) {
    sub.seeds.push_back(v);
    acc += flow.phi[v];
    if (acc >= target * (1.0 - kFractionSlack)) break;
  }

  // Seeds plus everything they reach downstream.
  std::vector<char> in_sub(n, 0);
  std::vector<NodeIndex> queue;
  for (NodeIndex v : sub.seeds) {
    in_sub[v] = 1;
    queue.push_back(v);
  }
  while (!queue.empty()) {
    NodeIndex v = queue.back();
    queue.pop_back();
    for (const MatrixEntry& e : w.row(v)) {
      if (!in_sub[e.owned]) {
        in_sub[e.owned] = 1;
        queue.push_back(e.owned);
      }
    }
  }

  for (NodeIndex v = 0; v < n; ++v)
    if (in_sub[v]) sub.nodes.push_back(v);
  for (const MatrixEntry& e : w.entries())
    if (in_sub[e.owner] && in_sub[e.owned]) sub.edges.push_back(e);
  return sub;
}

}  // namespace flowspine
