#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "radnet/errors.hpp"
#include "radnet/network.hpp"
#include "radnet/rng.hpp"
#include "radnet/simulate.hpp"

namespace radnet {

enum class NetworkTemplate { chain, star, random_radial };

// Flow family assignment for generated edges; `mixed` draws one of the three
// single-commodity families per edge.
enum class FamilyChoice { linear, quadratic, power, mixed };

struct GenSpec {
  NetworkTemplate tmpl = NetworkTemplate::random_radial;
  int nodes = 2;
  int fictitious = 0;
  FamilyChoice family = FamilyChoice::linear;
  std::size_t commodities = 1;  // linear family only
  double gamma = 1.852;         // power-law exponent
  std::uint64_t seed = 0;
};

namespace detail {

inline FlowFunctionSpec draw_spec(const GenSpec& gen, std::uint64_t key) {
  FamilyChoice family = gen.family;
  if (family == FamilyChoice::mixed) {
    switch (rng::uniform_index(rng::mix(key, 11), 3)) {
      case 0: family = FamilyChoice::linear; break;
      case 1: family = FamilyChoice::quadratic; break;
      default: family = FamilyChoice::power; break;
    }
  }
  switch (family) {
    case FamilyChoice::linear: {
      const std::size_t commodities = gen.family == FamilyChoice::mixed ? 1 : gen.commodities;
      std::vector<double> c(commodities);
      for (std::size_t k = 0; k < commodities; ++k)
        c[k] = rng::uniform(rng::mix(key, 21, k), 0.5, 1.5);
      return FlowFunctionSpec::linear(std::move(c));
    }
    case FamilyChoice::quadratic:
      return FlowFunctionSpec::quadratic(rng::uniform(rng::mix(key, 22), 0.5, 1.5),
                                         rng::uniform(rng::mix(key, 23), -0.2, 0.2));
    default:
      return FlowFunctionSpec::power(rng::uniform(rng::mix(key, 24), 0.5, 1.5), gen.gamma);
  }
}

}  // namespace detail

// Builds a radial network plus fictitious (non-operational) candidate edges
// sampled uniformly among the non-tree pairs. The operational subset is a
// valid spanning tree by construction, rooted at node 0.
inline NetworkGraph gen_network(const GenSpec& gen) {
  if (gen.nodes < 2) throw InvalidSpec("generated networks need at least 2 nodes");
  std::vector<std::pair<NodeId, NodeId>> tree_edges;
  tree_edges.reserve(static_cast<std::size_t>(gen.nodes) - 1);
  switch (gen.tmpl) {
    case NetworkTemplate::chain:
      for (NodeId a = 1; a < gen.nodes; ++a) tree_edges.push_back({a - 1, a});
      break;
    case NetworkTemplate::star:
      for (NodeId a = 1; a < gen.nodes; ++a) tree_edges.push_back({0, a});
      break;
    case NetworkTemplate::random_radial:
      // Random recursive tree: each node attaches to a uniform predecessor.
      for (NodeId a = 1; a < gen.nodes; ++a) {
        const NodeId parent = static_cast<NodeId>(rng::uniform_index(
            rng::mix(gen.seed, stream::topology, static_cast<std::uint64_t>(a)),
            static_cast<std::uint64_t>(a)));
        tree_edges.push_back({parent, a});
      }
      break;
  }

  std::vector<char> is_tree(static_cast<std::size_t>(gen.nodes) * gen.nodes, 0);
  for (const auto& [u, v] : tree_edges)
    is_tree[static_cast<std::size_t>(u) * gen.nodes + v] =
        is_tree[static_cast<std::size_t>(v) * gen.nodes + u] = 1;

  std::vector<std::pair<NodeId, NodeId>> spare;
  for (NodeId a = 0; a < gen.nodes; ++a)
    for (NodeId b = a + 1; b < gen.nodes; ++b)
      if (!is_tree[static_cast<std::size_t>(a) * gen.nodes + b]) spare.push_back({a, b});
  if (static_cast<std::size_t>(gen.fictitious) > spare.size())
    throw TooManyFictitious("requested " + std::to_string(gen.fictitious) +
                            " fictitious edges, only " + std::to_string(spare.size()) +
                            " non-tree pairs exist");
  // Partial Fisher-Yates over the spare pairs.
  for (int i = 0; i < gen.fictitious; ++i) {
    const std::size_t j =
        i + rng::uniform_index(rng::mix(gen.seed, stream::topology, 777, static_cast<std::uint64_t>(i)),
                               spare.size() - static_cast<std::size_t>(i));
    std::swap(spare[static_cast<std::size_t>(i)], spare[j]);
  }

  std::vector<CandidateEdge> edges;
  edges.reserve(tree_edges.size() + static_cast<std::size_t>(gen.fictitious));
  std::uint64_t edge_no = 0;
  for (const auto& [u, v] : tree_edges)
    edges.push_back({u, v, detail::draw_spec(gen, rng::mix(gen.seed, stream::params, edge_no++)),
                     true});
  for (int i = 0; i < gen.fictitious; ++i)
    edges.push_back({spare[static_cast<std::size_t>(i)].first,
                     spare[static_cast<std::size_t>(i)].second,
                     detail::draw_spec(gen, rng::mix(gen.seed, stream::params, edge_no++)),
                     false});
  return NetworkGraph(gen.nodes, 0, std::move(edges));
}

}  // namespace radnet
