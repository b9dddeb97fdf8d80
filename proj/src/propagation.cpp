#include "flowspine/propagation.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>

#include "flowspine/errors.hpp"

namespace flowspine {

namespace {

// Dense buffers grow as n^2; the vector-form flow solver covers anything
// bigger, so refuse instead of thrashing memory.
constexpr std::size_t kMaxDenseDim = 4096;

// Above this size the auto mode switches from the dense solve to the
// sparse fixed-point iteration.
constexpr std::size_t kAutoDirectLimit = 2000;

SolveMethod resolve_method(SolveMethod m, std::size_t n) {
  if (m != SolveMethod::Auto) return m;
  return n <= kAutoDirectLimit ? SolveMethod::Direct : SolveMethod::FixedPoint;
}

void require_frobenius(const PropagationMatrix& a) {
  FrobeniusReport rep = check_frobenius_condition(a);
  if (rep.ok) return;
  std::vector<std::vector<std::uint32_t>> comps;
  for (const Scc& scc : rep.violating) comps.push_back(scc.members);
  std::string msg =
      "matrix has " + std::to_string(comps.size()) +
      " strongly connected component(s) that are entirely owned by themselves";
  throw FrobeniusViolationError(msg, std::move(comps));
}

void require_dense_capacity(std::size_t n, const char* what) {
  if (n > kMaxDenseDim)
    throw Error(std::string(what) + " materializes a dense " + std::to_string(n) + "x" +
                std::to_string(n) + " matrix; limited to " + std::to_string(kMaxDenseDim) +
                " nodes (use the vector-form flow solver instead)");
}

}  // namespace

PropagationMatrix PropagationMatrix::ownership(const OwnershipNetwork& net) {
  std::vector<MatrixEntry> entries;
  entries.reserve(net.edge_count());
  for (const Edge& e : net.edges()) entries.push_back({e.source, e.target, e.weight});
  return from_entries(net.node_count(), std::move(entries));
}

PropagationMatrix PropagationMatrix::control(const OwnershipNetwork& net,
                                             const MetricsTable& metrics) {
  std::vector<MatrixEntry> entries;
  entries.reserve(net.edge_count());
  for (EdgeId e = 0; e < net.edge_count(); ++e) {
    const double h = metrics.edge_control[e];
    if (h <= 0.0) continue;  // threshold model yields structural zeros
    const Edge& edge = net.edges()[e];
    entries.push_back({edge.source, edge.target, h});
  }
  return from_entries(net.node_count(), std::move(entries));
}

PropagationMatrix PropagationMatrix::from_entries(std::size_t n,
                                                  std::vector<MatrixEntry> entries) {
  PropagationMatrix m;
  m.n_ = n;
  m.entries_ = std::move(entries);
  std::sort(m.entries_.begin(), m.entries_.end(),
            [](const MatrixEntry& a, const MatrixEntry& b) {
              if (a.owner != b.owner) return a.owner < b.owner;
              return a.owned < b.owned;
            });
  for (const MatrixEntry& e : m.entries_) {
    if (e.owner >= n || e.owned >= n) throw Error("matrix entry index out of range");
    if (e.value < 0.0) throw Error("matrix entries must be non-negative");
  }
  m.row_offsets_.assign(n + 1, 0);
  for (const MatrixEntry& e : m.entries_) ++m.row_offsets_[e.owner + 1];
  for (std::size_t i = 0; i < n; ++i) m.row_offsets_[i + 1] += m.row_offsets_[i];

  auto sums = m.column_sums();
  for (std::size_t j = 0; j < n; ++j) {
    if (sums[j] > 1.0 + kColumnSumTolerance)
      throw Error("column " + std::to_string(j) + " sums to " + std::to_string(sums[j]) +
                  "; normalize ownership before building propagation matrices");
  }
  return m;
}

std::span<const MatrixEntry> PropagationMatrix::row(NodeIndex owner) const {
  return std::span<const MatrixEntry>(entries_.data() + row_offsets_[owner],
                                      row_offsets_[owner + 1] - row_offsets_[owner]);
}

std::vector<double> PropagationMatrix::column_sums() const {
  std::vector<double> sums(n_, 0.0);
  for (const MatrixEntry& e : entries_) sums[e.owned] += e.value;
  return sums;
}

void PropagationMatrix::multiply(std::span<const double> x, std::span<double> y) const {
  for (std::size_t i = 0; i < n_; ++i) {
    double acc = 0.0;
    for (const MatrixEntry& e : row(static_cast<NodeIndex>(i))) acc += e.value * x[e.owned];
    y[i] = acc;
  }
}

std::vector<Scc> PropagationMatrix::support_components() const {
  std::vector<std::uint32_t> offsets(n_ + 1, 0);
  std::vector<NodeIndex> targets(entries_.size());
  for (std::size_t k = 0; k < entries_.size(); ++k) targets[k] = entries_[k].owned;
  for (std::size_t i = 0; i <= n_; ++i) offsets[i] = row_offsets_[i];

  auto raw = detail::tarjan_components(n_, offsets, targets);
  std::vector<Scc> sccs;
  sccs.reserve(raw.size());
  for (auto& members : raw) {
    std::sort(members.begin(), members.end());
    sccs.push_back(Scc{std::move(members)});
  }
  std::sort(sccs.begin(), sccs.end(),
            [](const Scc& a, const Scc& b) { return a.members.front() < b.members.front(); });
  return sccs;
}

FrobeniusReport check_frobenius_condition(const PropagationMatrix& a,
                                          std::span<const Scc> sccs) {
  const std::size_t n = a.size();
  constexpr std::uint32_t kNone = 0xffffffffu;
  std::vector<std::uint32_t> comp_of(n, kNone);
  for (std::size_t c = 0; c < sccs.size(); ++c) {
    if (sccs[c].size() < 2) continue;
    for (NodeIndex v : sccs[c].members) comp_of[v] = static_cast<std::uint32_t>(c);
  }

  std::vector<double> within(n, 0.0);
  for (const MatrixEntry& e : a.entries()) {
    if (comp_of[e.owner] != kNone && comp_of[e.owner] == comp_of[e.owned])
      within[e.owned] += e.value;
  }

  FrobeniusReport report;
  for (const Scc& scc : sccs) {
    if (scc.size() < 2) continue;
    bool leaks = false;
    for (NodeIndex v : scc.members) {
      if (within[v] < 1.0 - kColumnSumTolerance) {
        leaks = true;
        break;
      }
    }
    if (!leaks) {
      report.ok = false;
      report.violating.push_back(scc);
    }
  }
  return report;
}

FrobeniusReport check_frobenius_condition(const PropagationMatrix& a) {
  auto sccs = a.support_components();
  return check_frobenius_condition(a, sccs);
}

std::span<const MatrixEntry> IntegratedResult::row(NodeIndex owner) const {
  auto lo = std::lower_bound(entries.begin(), entries.end(), owner,
                             [](const MatrixEntry& e, NodeIndex v) { return e.owner < v; });
  auto hi = lo;
  while (hi != entries.end() && hi->owner == owner) ++hi;
  if (lo == hi) return {};
  return std::span<const MatrixEntry>(entries.data() + (lo - entries.begin()),
                                      static_cast<std::size_t>(hi - lo));
}

IntegratedResult integrate(const PropagationMatrix& a, const SolveOptions& opts) {
  const std::size_t n = a.size();
  require_dense_capacity(n, "integrate");
  require_frobenius(a);

  const SolveMethod method = resolve_method(opts.method, n);
  Eigen::MatrixXd dense = Eigen::MatrixXd::Zero(n, n);
  for (const MatrixEntry& e : a.entries()) dense(e.owner, e.owned) = e.value;

  IntegratedResult result;
  result.n = n;
  result.solver = method;

  Eigen::MatrixXd solution;
  if (method == SolveMethod::Direct) {
    Eigen::MatrixXd lhs = Eigen::MatrixXd::Identity(n, n) - dense;
    solution = lhs.partialPivLu().solve(dense);
  } else {
    solution = dense;
    Eigen::MatrixXd next(n, n);
    std::size_t iter = 0;
    double delta = 0.0;
    for (;;) {
      next = dense;
      for (const MatrixEntry& e : a.entries()) next.row(e.owner) += e.value * solution.row(e.owned);
      delta = (next - solution).cwiseAbs().maxCoeff();
      solution.swap(next);
      ++iter;
      if (delta < opts.tol) break;
      if (iter >= opts.max_iter)
        throw NonConvergenceError("fixed-point iteration did not converge within " +
                                      std::to_string(opts.max_iter) + " iterations",
                                  iter, delta);
    }
    result.iterations = iter;
  }

  // Residual of the defining equation, with the product taken sparsely.
  Eigen::MatrixXd product = Eigen::MatrixXd::Zero(n, n);
  for (const MatrixEntry& e : a.entries()) product.row(e.owner) += e.value * solution.row(e.owned);
  result.residual = (solution - dense - product).cwiseAbs().maxCoeff();

  // The direct solve leaves O(eps) noise on structurally-zero pairs.
  constexpr double kDropBelow = 1e-14;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double v = solution(i, j);
      if (std::abs(v) > kDropBelow)
        result.entries.push_back(
            {static_cast<NodeIndex>(i), static_cast<NodeIndex>(j), v});
    }
  }
  return result;
}

std::vector<double> integrated_control_value(const IntegratedResult& integrated,
                                             std::span<const double> values) {
  std::vector<double> ctilde(integrated.n, 0.0);
  for (const MatrixEntry& e : integrated.entries) ctilde[e.owner] += e.value * values[e.owned];
  return ctilde;
}

FlowResult flow_steady_state(const PropagationMatrix& w, std::span<const double> values,
                             const SolveOptions& opts) {
  const std::size_t n = w.size();
  require_frobenius(w);

  const SolveMethod method = resolve_method(opts.method, n);
  FlowResult result;
  result.produced.assign(values.begin(), values.end());
  result.solver = method;

  if (method == SolveMethod::Direct) {
    require_dense_capacity(n, "direct flow solve");
    Eigen::MatrixXd lhs = Eigen::MatrixXd::Identity(n, n);
    for (const MatrixEntry& e : w.entries()) lhs(e.owner, e.owned) -= e.value;
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
    {
      std::vector<double> wv(n, 0.0);
      w.multiply(values, wv);
      for (std::size_t i = 0; i < n; ++i) rhs(i) = wv[i];
    }
    Eigen::VectorXd phi = lhs.partialPivLu().solve(rhs);
    result.phi.assign(phi.data(), phi.data() + n);
  } else {
    std::vector<double> phi(n, 0.0), buffer(n, 0.0), next(n, 0.0);
    std::size_t iter = 0;
    double delta = 0.0;
    for (;;) {
      for (std::size_t i = 0; i < n; ++i) buffer[i] = values[i] + phi[i];
      w.multiply(buffer, next);
      delta = 0.0;
      for (std::size_t i = 0; i < n; ++i) delta = std::max(delta, std::abs(next[i] - phi[i]));
      phi.swap(next);
      ++iter;
      if (delta < opts.tol) break;
      if (iter >= opts.max_iter)
        throw NonConvergenceError("fixed-point iteration did not converge within " +
                                      std::to_string(opts.max_iter) + " iterations",
                                  iter, delta);
    }
    result.iterations = iter;
    result.phi = std::move(phi);
  }

  // residual = max | phi - W (v + phi) |
  {
    std::vector<double> buffer(n, 0.0), check(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) buffer[i] = values[i] + result.phi[i];
    w.multiply(buffer, check);
    double r = 0.0;
    for (std::size_t i = 0; i < n; ++i) r = std::max(r, std::abs(result.phi[i] - check[i]));
    result.residual = r;
  }
  return result;
}

}  // namespace flowspine
