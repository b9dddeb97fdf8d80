#pragma once

#include <span>
#include <vector>

#include "flowspine/metrics.hpp"
#include "flowspine/network.hpp"
#include "flowspine/topology.hpp"

namespace flowspine {

/// A_ij: fraction of j owned (or controlled) by i.
struct MatrixEntry {
  NodeIndex owner = 0;
  NodeIndex owned = 0;
  double value = 0.0;
};

/// Sparse non-negative matrix with column sums bounded by 1; the input of
/// the integrated model and of the steady-state flow solver.
class PropagationMatrix {
 public:
  static PropagationMatrix ownership(const OwnershipNetwork& net);
  static PropagationMatrix control(const OwnershipNetwork& net, const MetricsTable& metrics);
  static PropagationMatrix from_entries(std::size_t n, std::vector<MatrixEntry> entries);

  std::size_t size() const { return n_; }
  const std::vector<MatrixEntry>& entries() const { return entries_; }
  std::span<const MatrixEntry> row(NodeIndex owner) const;

  std::vector<double> column_sums() const;

  /// y = A x, accumulated in a fixed order for deterministic results.
  void multiply(std::span<const double> x, std::span<double> y) const;

  /// Maximal SCCs of the support graph, as member-index lists.
  std::vector<Scc> support_components() const;

 private:
  std::size_t n_ = 0;
  std::vector<MatrixEntry> entries_;        // sorted by (owner, owned)
  std::vector<std::uint32_t> row_offsets_;  // size n+1
};

enum class SolveMethod : std::uint8_t { Auto, Direct, FixedPoint };

struct SolveOptions {
  SolveMethod method = SolveMethod::Auto;
  double tol = 1e-10;            // max-norm update threshold for FixedPoint
  std::size_t max_iter = 1000000;
};

struct FrobeniusReport {
  bool ok = true;
  std::vector<Scc> violating;
};

/// Sufficient condition for the Frobenius root of A to be below one: every
/// SCC with >= 2 members has a node whose within-SCC column sum is < 1.
FrobeniusReport check_frobenius_condition(const PropagationMatrix& a,
                                          std::span<const Scc> sccs);
FrobeniusReport check_frobenius_condition(const PropagationMatrix& a);

/// Integrated ownership/control over all direct and indirect paths.
struct IntegratedResult {
  std::size_t n = 0;
  std::vector<MatrixEntry> entries;  // nonzeros of the integrated matrix
  SolveMethod solver = SolveMethod::Direct;
  std::size_t iterations = 0;
  double residual = 0.0;  // max-norm of (A~ - A - A A~)

  std::span<const MatrixEntry> row(NodeIndex owner) const;
};

/// Solves A~ = A + A A~. Direct does a dense linear solve; FixedPoint
/// iterates the recursion until the max-norm update drops below tol.
/// Both materialize the full matrix, so the dimension is capped.
IntegratedResult integrate(const PropagationMatrix& a, const SolveOptions& opts = {});

/// c~_i = sum_j A~_ij v_j over the integrated control matrix.
std::vector<double> integrated_control_value(const IntegratedResult& integrated,
                                             std::span<const double> values);

/// Steady-state inflow phi = W (v + phi). Solves the vector form directly,
/// which scales to large sparse networks.
struct FlowResult {
  std::vector<double> phi;
  std::vector<double> produced;  // the v the solve was run with
  SolveMethod solver = SolveMethod::FixedPoint;
  std::size_t iterations = 0;
  double residual = 0.0;
};

FlowResult flow_steady_state(const PropagationMatrix& w, std::span<const double> values,
                             const SolveOptions& opts = {});

}  // namespace flowspine
