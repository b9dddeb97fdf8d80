#include <doctest.h>

#include <random>
#include <sstream>

#include "flowspine/errors.hpp"
#include "flowspine/io.hpp"
#include "flowspine/metrics.hpp"
#include "flowspine/network.hpp"
#include "helpers.hpp"

using namespace flowspine;
using namespace testutil;

TEST_CASE("minimal well-formed network") {
  auto net = make_net({holder("A"), firm("B", 100.0)}, {edge("A", "B", 0.6)});
  CHECK(net.node_count() == 2);
  CHECK(net.edge_count() == 1);
  CHECK(net.node(*net.find("A")).kind == NodeKind::PureHolder);
  CHECK(net.node(*net.find("B")).value == 100.0);
  CHECK(net.out_degree(*net.find("A")) == 1);
  CHECK(net.in_degree(*net.find("B")) == 1);
  CHECK(net.total_value() == 100.0);
}

TEST_CASE("duplicate edges merge by summation with a warning") {
  std::vector<std::string> warnings;
  auto net = make_net({holder("A"), firm("B", 1.0)},
                      {edge("A", "B", 0.3), edge("A", "B", 0.3)}, &warnings);
  CHECK(net.edge_count() == 1);
  CHECK(net.edges()[0].weight == doctest::Approx(0.6));
  REQUIRE(warnings.size() == 1);
  CHECK(warnings[0].find("merged") != std::string::npos);
}

TEST_CASE("self-loops are dropped with a warning") {
  std::vector<std::string> warnings;
  auto net = make_net({holder("A"), firm("B", 1.0)},
                      {edge("A", "B", 0.5), edge("B", "B", 0.1)}, &warnings);
  CHECK(net.edge_count() == 1);
  REQUIRE(warnings.size() == 1);
  CHECK(warnings[0].find("self-loop") != std::string::npos);
  CHECK(validate(net).ok());
}

TEST_CASE("endpoints missing from the node list are auto-created") {
  std::vector<std::string> warnings;
  auto net = make_net({firm("B", 5.0)}, {edge("X", "B", 0.5), edge("B", "Y", 0.2)}, &warnings);
  REQUIRE(net.node_count() == 3);
  const Node& x = net.node(*net.find("X"));
  const Node& y = net.node(*net.find("Y"));
  CHECK(x.kind == NodeKind::PureHolder);  // only ever a source
  CHECK(x.auto_created);
  CHECK(y.kind == NodeKind::Firm);  // owned, so it cannot be a pure holder
  CHECK(y.auto_created);
  CHECK(warnings.size() == 2);
  CHECK(validate(net).ok());
}

TEST_CASE("load rejects malformed input") {
  CHECK_THROWS_AS(make_net({holder("A"), holder("A")}, {}), DuplicateNodeIdError);
  CHECK_THROWS_AS(make_net({holder("A"), firm("B", 1.0)}, {edge("A", "B", -0.1)}),
                  NegativeWeightError);
  CHECK_THROWS_AS(make_net({holder("A"), firm("B", 1.0)}, {edge("A", "B", 0.0)}),
                  NegativeWeightError);
  CHECK_THROWS_AS(make_net({firm("B", -3.0)}, {}), NegativeValueError);
  CHECK_THROWS_AS(make_net({NodeRecord{"", NodeKind::Firm, 1.0}}, {}), MalformedRecordError);
}

TEST_CASE("normalization rescales under-reported columns") {
  auto raw = make_net({holder("A"), holder("B"), firm("J", 1.0)},
                      {edge("A", "J", 0.4), edge("B", "J", 0.4)});
  auto net = normalize_ownership(raw);
  for (const Edge& e : net.edges()) CHECK(e.weight == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("normalization leaves complete columns untouched") {
  auto raw = make_net({holder("A"), firm("J", 1.0)}, {edge("A", "J", 1.0)});
  auto net = normalize_ownership(raw);
  CHECK(net.edges()[0].weight == 1.0);
}

TEST_CASE("over-reported columns are scaled down to one with a warning") {
  auto raw = make_net({holder("A"), holder("B"), firm("J", 1.0)},
                      {edge("A", "J", 0.7), edge("B", "J", 0.6)});
  std::vector<std::string> warnings;
  auto net = normalize_ownership(raw, &warnings);
  REQUIRE(warnings.size() == 1);
  CHECK(warnings[0].find("scaled down") != std::string::npos);

  const NodeIndex j = *net.find("J");
  double wa = 0.0, wb = 0.0;
  for (EdgeId e : net.in_edge_ids(j)) {
    const Edge& ed = net.edges()[e];
    (net.node(ed.source).id == "A" ? wa : wb) = ed.weight;
  }
  CHECK(wa == doctest::Approx(7.0 / 13.0).epsilon(1e-12));
  CHECK(wb == doctest::Approx(6.0 / 13.0).epsilon(1e-12));
}

TEST_CASE("normalization invariant and idempotence on fuzzed networks") {
  std::mt19937_64 rng(7);
  for (int round = 0; round < 30; ++round) {
    auto net = random_network(rng, 12, 5, 0.15);
    for (NodeIndex j = 0; j < net.node_count(); ++j) {
      if (net.in_degree(j) == 0) continue;
      CHECK(std::abs(net.in_weight_sum(j) - 1.0) <= 1e-9);
    }
    auto again = normalize_ownership(net);
    REQUIRE(again.edge_count() == net.edge_count());
    for (std::size_t e = 0; e < net.edge_count(); ++e)
      CHECK(again.edges()[e].weight == net.edges()[e].weight);  // bitwise idempotent
  }
}

TEST_CASE("validate flags the documented violations") {
  SUBCASE("clean normalized network") {
    auto net = normalize_ownership(
        make_net({holder("A"), firm("B", 100.0)}, {edge("A", "B", 0.6)}));
    CHECK(validate(net).ok());
  }
  SUBCASE("pure holder with owners") {
    auto net = make_net({holder("A"), holder("H")}, {edge("A", "H", 0.5)});
    auto report = validate(net);
    REQUIRE(report.violations.size() == 1);
    CHECK(report.violations[0].code == ValidationIssue::Code::HolderWithOwners);
  }
  SUBCASE("column sum above one before normalization") {
    auto net = make_net({holder("A"), holder("B"), firm("J", 1.0)},
                        {edge("A", "J", 0.7), edge("B", "J", 0.5)});
    auto report = validate(net);
    REQUIRE(report.violations.size() == 1);
    CHECK(report.violations[0].code == ValidationIssue::Code::ColumnSumExceedsOne);
  }
  SUBCASE("explicit zero value is a violation, missing value a note") {
    auto listed = make_net({firm("F", 0.0)}, {});
    auto report = validate(listed);
    REQUIRE(report.violations.size() == 1);
    CHECK(report.violations[0].code == ValidationIssue::Code::ZeroValueListedFirm);

    auto unlisted = make_net({NodeRecord{"F", NodeKind::Firm, std::nullopt}}, {});
    auto report2 = validate(unlisted);
    CHECK(report2.ok());
    CHECK(!report2.notes.empty());
  }
}

TEST_CASE("serialize then load is the identity on nodes and edges") {
  std::mt19937_64 rng(11);
  auto net = random_network(rng, 10, 4, 0.2);

  std::ostringstream nodes_csv, edges_csv;
  write_nodes_csv(nodes_csv, net);
  write_edges_csv(edges_csv, net);

  auto reloaded = load_network(parse_nodes_csv(nodes_csv.str(), "mem"),
                               parse_edges_csv(edges_csv.str(), "mem"));
  REQUIRE(reloaded.node_count() == net.node_count());
  REQUIRE(reloaded.edge_count() == net.edge_count());
  for (NodeIndex i = 0; i < net.node_count(); ++i) {
    const Node& a = net.node(i);
    const NodeIndex ri = *reloaded.find(a.id);
    const Node& b = reloaded.node(ri);
    CHECK(a.kind == b.kind);
    CHECK(a.value == b.value);
    CHECK(a.unlisted == b.unlisted);
  }
  for (const Edge& e : net.edges()) {
    const NodeIndex s = *reloaded.find(net.node(e.source).id);
    const NodeIndex t = *reloaded.find(net.node(e.target).id);
    bool found = false;
    for (const Edge& r : reloaded.out_edges(s)) {
      if (r.target == t) {
        CHECK(r.weight == e.weight);  // format_double round-trips exactly
        found = true;
      }
    }
    CHECK(found);
  }

  // and the metric tables coincide bit for bit
  auto before = compute_metrics(net);
  auto after = compute_metrics(reloaded);
  for (NodeIndex i = 0; i < net.node_count(); ++i) {
    const NodeIndex r = *reloaded.find(net.node(i).id);
    CHECK(before.k_in[i] == after.k_in[r]);
    CHECK(before.k_out[i] == after.k_out[r]);
    CHECK(before.strength[i] == after.strength[r]);
    CHECK(before.h[i] == after.h[r]);
    CHECK(before.p[i] == after.p[r]);
    CHECK(before.c[i] == after.c[r]);
    if (before.has_s(i)) CHECK(before.s[i] == after.s[r]);
  }
}
