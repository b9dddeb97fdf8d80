#include <cstdint>
#include <string>
#include <vector>

#include "flowspine/backbone.hpp"
#include "flowspine/errors.hpp"

namespace flowspine {

namespace {

// splitmix64; keeps generated fixtures bit-identical across platforms.
struct Rng {
  std::uint64_t state;

  explicit Rng(std::uint64_t seed) : state(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // uniform in [0.5, 1.5)
  double value() { return 0.5 + static_cast<double>(next() >> 11) * 0x1.0p-53; }
};

std::string padded_id(char prefix, std::size_t index, std::size_t total) {
  std::size_t width = 1;
  for (std::size_t t = total; t >= 10; t /= 10) ++width;
  std::string digits = std::to_string(index);
  std::string out(1, prefix);
  out.append(width > digits.size() ? width - digits.size() : 0, '0');
  out += digits;
  return out;
}

}  // namespace

IdealTopology parse_topology(std::string_view name) {
  if (name == "A" || name == "a") return IdealTopology::A;
  if (name == "B" || name == "b") return IdealTopology::B;
  if (name == "C" || name == "c") return IdealTopology::C;
  if (name == "D" || name == "d") return IdealTopology::D;
  if (name == "E" || name == "e") return IdealTopology::E;
  throw Error("unknown topology '" + std::string(name) + "'; expected A, B, C or D");
}

OwnershipNetwork generate_idealized(IdealTopology topology, std::size_t n_stocks,
                                    std::size_t n_holders, std::uint64_t seed) {
  if (topology == IdealTopology::E)
    throw RegionEExcludedError(
        "topology E is excluded: sole ownership with fewer stocks than holders is "
        "inconsistent");
  if (n_stocks < 1 || n_holders < 1)
    throw Error("idealized topologies need at least one stock and one holder");

  switch (topology) {
    case IdealTopology::A:
      if (n_holders != n_stocks)
        throw Error("topology A pairs each holder with exactly one stock; sizes must match");
      break;
    case IdealTopology::B:
      if (n_holders < 2)
        throw Error("topology B needs at least two holders per stock");
      break;
    case IdealTopology::C:
      if (n_holders < 2 * n_stocks)
        throw Error("topology C needs a dominant plus at least one minority holder per "
                    "stock (n_holders >= 2 * n_stocks)");
      break;
    case IdealTopology::D:
      if (n_stocks < n_holders)
        throw Error("topology D needs at least one stock per holder");
      break;
    case IdealTopology::E:
      break;
  }

  Rng rng(seed);
  std::vector<NodeRecord> nodes;
  std::vector<EdgeRecord> edges;
  std::vector<std::string> stock_ids(n_stocks), holder_ids(n_holders);

  for (std::size_t k = 0; k < n_holders; ++k) {
    holder_ids[k] = padded_id('H', k, n_holders);
    nodes.push_back({holder_ids[k], NodeKind::PureHolder, 0.0});
  }
  for (std::size_t k = 0; k < n_stocks; ++k) {
    stock_ids[k] = padded_id('S', k, n_stocks);
    nodes.push_back({stock_ids[k], NodeKind::Firm, rng.value()});
  }

  switch (topology) {
    case IdealTopology::A:
      // One holder per stock: both control and value stay spread out.
      for (std::size_t k = 0; k < n_stocks; ++k)
        edges.push_back({holder_ids[k], stock_ids[k], 1.0});
      break;

    case IdealTopology::B:
      // A small club of holders with equal slices of every stock.
      for (std::size_t k = 0; k < n_stocks; ++k)
        for (std::size_t i = 0; i < n_holders; ++i)
          edges.push_back({holder_ids[i], stock_ids[k],
                           1.0 / static_cast<double>(n_holders)});
      break;

    case IdealTopology::C: {
      // Each stock has its own dominant holder; the remaining holders are
      // spread round-robin as minority shareholders.
      const std::size_t minorities = n_holders - n_stocks;
      std::vector<std::size_t> minority_count(n_stocks, 0);
      for (std::size_t m = 0; m < minorities; ++m) ++minority_count[m % n_stocks];
      for (std::size_t k = 0; k < n_stocks; ++k)
        edges.push_back({holder_ids[k], stock_ids[k], 0.6});
      for (std::size_t m = 0; m < minorities; ++m) {
        const std::size_t k = m % n_stocks;
        edges.push_back({holder_ids[n_stocks + m], stock_ids[k],
                         0.4 / static_cast<double>(minority_count[k])});
      }
      break;
    }

    case IdealTopology::D:
      // Few holders, each sole owner of a block of stocks.
      for (std::size_t k = 0; k < n_stocks; ++k)
        edges.push_back({holder_ids[k % n_holders], stock_ids[k], 1.0});
      break;

    case IdealTopology::E:
      break;
  }

  return load_network(nodes, edges);
}

}  // namespace flowspine
