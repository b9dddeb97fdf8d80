#include <doctest.h>

#include <cmath>
#include <map>
#include <random>

#include "flowspine/errors.hpp"
#include "flowspine/propagation.hpp"
#include "helpers.hpp"

using namespace flowspine;
using namespace testutil;

namespace {

double entry_of(const IntegratedResult& r, NodeIndex i, NodeIndex j) {
  for (const MatrixEntry& e : r.entries)
    if (e.owner == i && e.owned == j) return e.value;
  return 0.0;
}

using DenseMap = std::map<std::pair<NodeIndex, NodeIndex>, double>;

DenseMap as_map(const IntegratedResult& r) {
  DenseMap m;
  for (const MatrixEntry& e : r.entries) m[{e.owner, e.owned}] = e.value;
  return m;
}

}  // namespace

TEST_CASE("propagation matrix enforces the column-sum bound") {
  CHECK_THROWS_AS(PropagationMatrix::from_entries(2, {{0, 1, 0.7}, {1, 1, 0.5}}), Error);
  auto ok = PropagationMatrix::from_entries(2, {{0, 1, 1.0}});
  CHECK(ok.column_sums()[1] == doctest::Approx(1.0));
}

TEST_CASE("frobenius condition") {
  SUBCASE("acyclic support always passes") {
    auto net = make_net({holder("A"), firm("B", 1.0), firm("C", 1.0)},
                        {edge("A", "B", 1.0), edge("B", "C", 1.0)});
    auto a = PropagationMatrix::ownership(net);
    CHECK(check_frobenius_condition(a).ok);
  }
  SUBCASE("leaking cycle passes") {
    auto net = make_net({firm("B", 1.0), firm("C", 1.0)},
                        {edge("B", "C", 0.99), edge("C", "B", 0.99)});
    auto a = PropagationMatrix::ownership(net);
    CHECK(check_frobenius_condition(a).ok);
  }
  SUBCASE("fully self-owned cycle fails and is reported") {
    auto net = make_net({firm("B", 1.0), firm("C", 1.0)},
                        {edge("B", "C", 1.0), edge("C", "B", 1.0)});
    auto a = PropagationMatrix::ownership(net);
    auto report = check_frobenius_condition(a);
    CHECK(!report.ok);
    REQUIRE(report.violating.size() == 1);
    CHECK(report.violating[0].size() == 2);
    CHECK_THROWS_AS(integrate(a), FrobeniusViolationError);
    std::vector<double> v{1.0, 1.0};
    CHECK_THROWS_AS(flow_steady_state(a, v), FrobeniusViolationError);
  }
}

TEST_CASE("integrated ownership on a full chain") {
  auto net = make_net({holder("A"), firm("B", 1.0), firm("C", 1.0)},
                      {edge("A", "B", 1.0), edge("B", "C", 1.0)});
  auto a = PropagationMatrix::ownership(net);
  const NodeIndex A = *net.find("A"), B = *net.find("B"), C = *net.find("C");
  for (SolveMethod method : {SolveMethod::Direct, SolveMethod::FixedPoint}) {
    SolveOptions opts;
    opts.method = method;
    auto r = integrate(a, opts);
    CHECK(entry_of(r, A, B) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(entry_of(r, B, C) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(entry_of(r, A, C) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(r.residual <= 1e-9);
  }
}

TEST_CASE("integrated ownership through a cross-shareholding cycle") {
  auto net = make_net({holder("A"), firm("B", 1.0), firm("C", 1.0)},
                      {edge("A", "B", 0.8), edge("B", "C", 0.2), edge("C", "B", 0.2)});
  auto a = PropagationMatrix::ownership(net);
  const NodeIndex A = *net.find("A"), B = *net.find("B"), C = *net.find("C");
  for (SolveMethod method : {SolveMethod::Direct, SolveMethod::FixedPoint}) {
    SolveOptions opts;
    opts.method = method;
    auto r = integrate(a, opts);
    CHECK(std::abs(entry_of(r, A, B) - 0.8 / 0.96) <= 1e-6);
    CHECK(std::abs(entry_of(r, A, C) - 0.16 / 0.96) <= 1e-6);
  }
}

TEST_CASE("zero matrix integrates to zero") {
  auto a = PropagationMatrix::from_entries(3, {});
  auto r = integrate(a);
  CHECK(r.entries.empty());
  CHECK(r.residual == 0.0);
}

TEST_CASE("integrated control value") {
  SUBCASE("full chain accumulates downstream value") {
    auto net = make_net({holder("A"), firm("B", 10.0), firm("C", 5.0)},
                        {edge("A", "B", 1.0), edge("B", "C", 1.0)});
    auto m = compute_metrics(net);
    auto h = PropagationMatrix::control(net, m);
    auto r = integrate(h);
    auto ctilde = integrated_control_value(r, values_of(net));
    CHECK(ctilde[*net.find("A")] == doctest::Approx(15.0).epsilon(1e-9));
    CHECK(ctilde[*net.find("B")] == doctest::Approx(5.0).epsilon(1e-9));
  }
  SUBCASE("isolated holder controls nothing") {
    auto net = make_net({holder("A"), holder("Z"), firm("B", 3.0)}, {edge("A", "B", 1.0)});
    auto m = compute_metrics(net);
    auto r = integrate(PropagationMatrix::control(net, m));
    auto ctilde = integrated_control_value(r, values_of(net));
    CHECK(ctilde[*net.find("Z")] == 0.0);
  }
  SUBCASE("star adds up the leaves") {
    auto net = make_net(
        {holder("A"), firm("B", 1.0), firm("C", 2.0), firm("D", 3.0)},
        {edge("A", "B", 1.0), edge("A", "C", 1.0), edge("A", "D", 1.0)});
    auto m = compute_metrics(net);
    auto r = integrate(PropagationMatrix::control(net, m));
    auto ctilde = integrated_control_value(r, values_of(net));
    CHECK(ctilde[*net.find("A")] == doctest::Approx(6.0).epsilon(1e-10));
  }
}

TEST_CASE("steady-state flow on reference fixtures") {
  SUBCASE("one-hop aggregation") {
    auto net = make_net({holder("R"), firm("L1", 10.0), firm("L2", 10.0)},
                        {edge("R", "L1", 1.0), edge("R", "L2", 1.0)});
    auto w = PropagationMatrix::ownership(net);
    auto flow = flow_steady_state(w, values_of(net));
    CHECK(flow.phi[*net.find("R")] == doctest::Approx(20.0).epsilon(1e-10));
    CHECK(flow.phi[*net.find("L1")] == 0.0);
  }
  SUBCASE("chain recursion") {
    auto net = make_net({holder("R"), firm("M", 5.0), firm("L", 10.0)},
                        {edge("R", "M", 1.0), edge("M", "L", 1.0)});
    auto w = PropagationMatrix::ownership(net);
    auto flow = flow_steady_state(w, values_of(net));
    CHECK(flow.phi[*net.find("M")] == doctest::Approx(10.0).epsilon(1e-10));
    CHECK(flow.phi[*net.find("R")] == doctest::Approx(15.0).epsilon(1e-10));
  }
  SUBCASE("zero matrix carries no flow") {
    auto w = PropagationMatrix::from_entries(3, {});
    std::vector<double> v{1.0, 2.0, 3.0};
    auto flow = flow_steady_state(w, v);
    for (double phi : flow.phi) CHECK(phi == 0.0);
  }
}

TEST_CASE("fixed point reports non-convergence at the iteration cap") {
  auto net = make_net({holder("A"), firm("B", 1.0), firm("C", 1.0)},
                      {edge("A", "B", 0.8), edge("B", "C", 0.2), edge("C", "B", 0.2)});
  auto a = PropagationMatrix::ownership(net);
  SolveOptions opts;
  opts.method = SolveMethod::FixedPoint;
  opts.max_iter = 2;
  CHECK_THROWS_AS(integrate(a, opts), NonConvergenceError);
  std::vector<double> v = values_of(net);
  CHECK_THROWS_AS(flow_steady_state(a, v, opts), NonConvergenceError);
}

TEST_CASE("direct and fixed-point solvers agree on random networks") {
  std::mt19937_64 rng(31);
  std::uniform_int_distribution<std::size_t> firms(3, 40), holders(2, 8);
  for (int round = 0; round < 100; ++round) {
    auto net = random_network(rng, firms(rng), holders(rng), 0.1);
    auto m = compute_metrics(net);
    auto h = PropagationMatrix::control(net, m);

    SolveOptions direct{SolveMethod::Direct, 1e-10, 1000000};
    SolveOptions fixed{SolveMethod::FixedPoint, 1e-10, 1000000};
    auto a = as_map(integrate(h, direct));
    auto b = as_map(integrate(h, fixed));
    for (const auto& [key, value] : a) {
      auto it = b.find(key);
      const double other = it == b.end() ? 0.0 : it->second;
      CHECK(std::abs(value - other) <= 1e-8);
    }
    for (const auto& [key, value] : b)
      if (!a.count(key)) CHECK(std::abs(value) <= 1e-8);
  }
}

TEST_CASE("integrated control equals steady-state flow on the control matrix") {
  std::mt19937_64 rng(37);
  std::uniform_int_distribution<std::size_t> firms(3, 40), holders(2, 8);
  for (int round = 0; round < 100; ++round) {
    auto net = random_network(rng, firms(rng), holders(rng), 0.1);
    auto m = compute_metrics(net);
    auto h = PropagationMatrix::control(net, m);
    auto v = values_of(net);

    SolveOptions direct{SolveMethod::Direct, 1e-10, 1000000};
    auto ctilde = integrated_control_value(integrate(h, direct), v);
    auto flow = flow_steady_state(h, v, direct);
    std::vector<double> direct_inflow(net.node_count(), 0.0);
    h.multiply(v, direct_inflow);
    for (NodeIndex i = 0; i < net.node_count(); ++i) {
      CHECK(std::abs(ctilde[i] - flow.phi[i]) <= 1e-10);
      CHECK(flow.phi[i] >= direct_inflow[i] - 1e-12);  // paths only ever add
    }
  }
}

TEST_CASE("mass conservation on value-producing DAGs") {
  std::mt19937_64 rng(41);
  std::uniform_int_distribution<std::size_t> roots(1, 5), inner(3, 30);
  for (int round = 0; round < 50; ++round) {
    const std::size_t n_roots = roots(rng);
    auto net = random_dag(rng, n_roots, inner(rng));
    auto w = PropagationMatrix::ownership(net);
    auto v = values_of(net);
    auto flow = flow_steady_state(w, v);

    double root_inflow = 0.0, produced = 0.0;
    for (NodeIndex i = 0; i < net.node_count(); ++i) {
      if (net.in_degree(i) == 0)
        root_inflow += flow.phi[i];
      else
        produced += v[i];
    }
    CHECK(std::abs(root_inflow - produced) <= 1e-9);
  }
}

TEST_CASE("integration dominates the direct matrix entrywise") {
  std::mt19937_64 rng(43);
  for (int round = 0; round < 20; ++round) {
    auto net = random_network(rng, 20, 5, 0.15);
    auto a = PropagationMatrix::ownership(net);
    auto r = integrate(a);
    auto integrated = as_map(r);
    for (const MatrixEntry& e : a.entries()) {
      auto it = integrated.find({e.owner, e.owned});
      REQUIRE(it != integrated.end());
      CHECK(it->second >= e.value - 1e-12);
    }
  }
}

TEST_CASE("fixed point finishes within the longest path length on DAGs") {
  std::mt19937_64 rng(47);
  for (int round = 0; round < 25; ++round) {
    auto net = random_dag(rng, 2, 20);
    auto a = PropagationMatrix::ownership(net);
    SolveOptions opts;
    opts.method = SolveMethod::FixedPoint;
    auto r = integrate(a, opts);
    CHECK(r.iterations <= std::max<std::size_t>(1, longest_path_edges(net)));
  }
}
