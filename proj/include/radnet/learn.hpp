#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "radnet/errors.hpp"
#include "radnet/network.hpp"
#include "radnet/simulate.hpp"

namespace radnet {

// Unordered node pair, stored with u < v.
struct NodePair {
  NodeId u = 0;
  NodeId v = 0;
  NodePair() = default;
  NodePair(NodeId a, NodeId b) : u(std::min(a, b)), v(std::max(a, b)) {}
  friend bool operator==(const NodePair&, const NodePair&) = default;
  friend auto operator<=>(const NodePair&, const NodePair&) = default;
};

// phi estimate per candidate edge: the unbiased sample variance of the
// potential difference across the pair.
struct EdgeWeightMap {
  std::vector<NodePair> edges;
  std::vector<double> phi;
  std::size_t sample_count = 0;
};

inline EdgeWeightMap edge_variances(const MeasurementSet& ms,
                                    std::span<const NodePair> candidates) {
  const std::size_t m = ms.sample_count();
  if (m < 2) throw InsufficientSamples("variance needs m >= 2 samples, got " + std::to_string(m));
  EdgeWeightMap map;
  map.sample_count = m;
  map.edges.assign(candidates.begin(), candidates.end());
  map.phi.resize(candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const auto [u, v] = candidates[i];
    if (u < 0 || v < 0 || static_cast<std::size_t>(u) >= ms.node_count() ||
        static_cast<std::size_t>(v) >= ms.node_count())
      throw UnmeasuredNode("candidate edge (" + std::to_string(u) + "," + std::to_string(v) +
                           ") touches a node without measurements");
    const std::size_t cu = static_cast<std::size_t>(u), cv = static_cast<std::size_t>(v);
    double mean = 0.0;
    for (std::size_t s = 0; s < m; ++s) mean += ms.samples(s, cu) - ms.samples(s, cv);
    mean /= static_cast<double>(m);
    double ss = 0.0;
    for (std::size_t s = 0; s < m; ++s) {
      const double d = ms.samples(s, cu) - ms.samples(s, cv) - mean;
      ss += d * d;
    }
    map.phi[i] = ss / static_cast<double>(m - 1);
  }
  return map;
}

// Union-by-size with path halving.
class DisjointSetForest {
public:
  explicit DisjointSetForest(std::size_t n) : parent_(n), size_(n, 1), components_(n) {
    std::iota(parent_.begin(), parent_.end(), 0);
  }

  int find(int x) {
    while (parent_[static_cast<std::size_t>(x)] != x) {
      parent_[static_cast<std::size_t>(x)] =
          parent_[static_cast<std::size_t>(parent_[static_cast<std::size_t>(x)])];
      x = parent_[static_cast<std::size_t>(x)];
    }
    return x;
  }

  bool unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    if (size_[static_cast<std::size_t>(a)] < size_[static_cast<std::size_t>(b)]) std::swap(a, b);
    parent_[static_cast<std::size_t>(b)] = a;
    size_[static_cast<std::size_t>(a)] += size_[static_cast<std::size_t>(b)];
    --components_;
    return true;
  }

  std::size_t components() const noexcept { return components_; }

private:
  std::vector<int> parent_;
  std::vector<std::size_t> size_;
  std::size_t components_;
};

struct LearnedEdge {
  NodeId u = 0;
  NodeId v = 0;
  double weight = 0.0;
  // Cheapest rejected candidate that would reconnect this edge's cut, minus
  // this edge's weight. Empty when no rejected candidate crosses the cut.
  std::optional<double> margin;
};

struct LearnedTopology {
  std::vector<LearnedEdge> edges;  // sorted by (u, v)
  double total_weight = 0.0;
  std::size_t sample_count = 0;
  // Node partition when grouping was applied; one group over all nodes
  // otherwise.
  std::vector<std::vector<NodeId>> groups;

  bool contains(NodeId a, NodeId b) const {
    const NodePair key(a, b);
    for (const LearnedEdge& e : edges)
      if (e.u == key.u && e.v == key.v) return true;
    return false;
  }
};

namespace detail {

// Relaxes margins of tree edges along the u-v path of each rejected
// candidate. The learned tree is rooted at its smallest node.
inline void compute_margins(int node_count, const EdgeWeightMap& weights,
                            const std::vector<std::size_t>& selected,
                            const std::vector<char>& is_selected,
                            std::vector<LearnedEdge>& out_edges,
                            const std::vector<std::size_t>& edge_slot) {
  const std::size_t n = static_cast<std::size_t>(node_count);
  std::vector<std::vector<std::pair<NodeId, std::size_t>>> adj(n);
  for (std::size_t idx : selected) {
    const NodePair& e = weights.edges[idx];
    adj[static_cast<std::size_t>(e.u)].push_back({e.v, edge_slot[idx]});
    adj[static_cast<std::size_t>(e.v)].push_back({e.u, edge_slot[idx]});
  }
  std::vector<NodeId> parent(n, -1);
  std::vector<std::size_t> parent_slot(n, 0);
  std::vector<int> depth(n, 0);
  std::vector<NodeId> order;
  order.reserve(n);
  order.push_back(0);
  std::vector<char> seen(n, 0);
  seen[0] = 1;
  for (std::size_t head = 0; head < order.size(); ++head)
    for (const auto& [next, slot] : adj[static_cast<std::size_t>(order[head])]) {
      if (seen[static_cast<std::size_t>(next)]) continue;
      seen[static_cast<std::size_t>(next)] = 1;
      parent[static_cast<std::size_t>(next)] = order[head];
      parent_slot[static_cast<std::size_t>(next)] = slot;
      depth[static_cast<std::size_t>(next)] = depth[static_cast<std::size_t>(order[head])] + 1;
      order.push_back(next);
    }

  for (std::size_t i = 0; i < weights.edges.size(); ++i) {
    if (is_selected[i]) continue;
    const double w = weights.phi[i];
    NodeId a = weights.edges[i].u, b = weights.edges[i].v;
    while (a != b) {
      NodeId& deeper = depth[static_cast<std::size_t>(a)] >= depth[static_cast<std::size_t>(b)] ? a : b;
      const std::size_t slot = parent_slot[static_cast<std::size_t>(deeper)];
      const double margin = w - out_edges[slot].weight;
      if (!out_edges[slot].margin || margin < *out_edges[slot].margin)
        out_edges[slot].margin = margin;
      deeper = parent[static_cast<std::size_t>(deeper)];
    }
  }
}

}  // namespace detail

// Kruskal over the weighted candidates. Ties break deterministically by
// (weight, min endpoint, max endpoint).
inline LearnedTopology kruskal_mst(int node_count, const EdgeWeightMap& weights) {
  for (const NodePair& e : weights.edges)
    if (e.u < 0 || e.v >= node_count)
      throw UnknownNode("candidate edge (" + std::to_string(e.u) + "," + std::to_string(e.v) +
                        ") outside the node range");
  std::vector<std::size_t> by_weight(weights.edges.size());
  std::iota(by_weight.begin(), by_weight.end(), 0);
  std::sort(by_weight.begin(), by_weight.end(), [&](std::size_t a, std::size_t b) {
    if (weights.phi[a] != weights.phi[b]) return weights.phi[a] < weights.phi[b];
    return weights.edges[a] < weights.edges[b];
  });

  DisjointSetForest dsf(static_cast<std::size_t>(node_count));
  std::vector<std::size_t> selected;
  std::vector<char> is_selected(weights.edges.size(), 0);
  for (std::size_t idx : by_weight) {
    const NodePair& e = weights.edges[idx];
    if (dsf.unite(e.u, e.v)) {
      selected.push_back(idx);
      is_selected[idx] = 1;
      if (selected.size() + 1 == static_cast<std::size_t>(node_count)) break;
    }
  }
  if (selected.size() + 1 != static_cast<std::size_t>(node_count)) {
    std::vector<int> roots;
    for (int a = 0; a < node_count; ++a) {
      const int r = dsf.find(a);
      if (r == a) roots.push_back(a);
    }
    std::string what = "candidate graph is disconnected; component roots:";
    for (int r : roots) what += " " + std::to_string(r);
    throw DisconnectedCandidates(what);
  }

  LearnedTopology topo;
  topo.sample_count = weights.sample_count;
  std::sort(selected.begin(), selected.end(), [&](std::size_t a, std::size_t b) {
    return weights.edges[a] < weights.edges[b];
  });
  std::vector<std::size_t> edge_slot(weights.edges.size(), 0);
  topo.edges.reserve(selected.size());
  for (std::size_t slot = 0; slot < selected.size(); ++slot) {
    const std::size_t idx = selected[slot];
    edge_slot[idx] = slot;
    topo.edges.push_back({weights.edges[idx].u, weights.edges[idx].v, weights.phi[idx], {}});
    topo.total_weight += weights.phi[idx];
  }
  detail::compute_margins(node_count, weights, selected, is_selected, topo.edges, edge_slot);

  std::vector<NodeId> all(static_cast<std::size_t>(node_count));
  std::iota(all.begin(), all.end(), 0);
  topo.groups = {std::move(all)};
  return topo;
}

inline std::vector<NodePair> complete_graph_pairs(int node_count) {
  std::vector<NodePair> pairs;
  pairs.reserve(static_cast<std::size_t>(node_count) * (node_count - 1) / 2);
  for (NodeId a = 0; a < node_count; ++a)
    for (NodeId b = a + 1; b < node_count; ++b) pairs.push_back({a, b});
  return pairs;
}

// Algorithm: weight candidates with the variance of potential differences,
// then take the minimum spanning tree. Without a candidate list the complete
// graph over measured nodes is used.
inline LearnedTopology learn_structure(const MeasurementSet& ms,
                                       std::optional<std::vector<NodePair>> candidates = {}) {
  const int n = static_cast<int>(ms.node_count());
  const std::vector<NodePair> pairs = candidates ? std::move(*candidates)
                                                 : complete_graph_pairs(n);
  return kruskal_mst(n, edge_variances(ms, pairs));
}

// Default correlation threshold for separating independently operated trees.
inline constexpr double kDefaultGroupThreshold = 0.1;

// Partition of the measured nodes into connected components of the graph
// linking a and b when |corr(pi_a, pi_b)| >= tau. Zero-variance columns
// correlate with nothing (correlation taken as 0). Potentials of separate
// operational trees are uncorrelated, so each tree lands in its own group.
inline std::vector<std::vector<NodeId>> group_components(const MeasurementSet& ms, double tau) {
  const std::size_t m = ms.sample_count();
  if (m < 2) throw InsufficientSamples("grouping needs m >= 2 samples");
  const std::size_t n = ms.node_count();
  std::vector<double> mean(n, 0.0), sd(n, 0.0);
  for (std::size_t c = 0; c < n; ++c) {
    for (std::size_t s = 0; s < m; ++s) mean[c] += ms.samples(s, c);
    mean[c] /= static_cast<double>(m);
    for (std::size_t s = 0; s < m; ++s) {
      const double d = ms.samples(s, c) - mean[c];
      sd[c] += d * d;
    }
    sd[c] = std::sqrt(sd[c]);
  }
  DisjointSetForest dsf(n);
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      double dot = 0.0;
      for (std::size_t s = 0; s < m; ++s)
        dot += (ms.samples(s, a) - mean[a]) * (ms.samples(s, b) - mean[b]);
      const double denom = sd[a] * sd[b];
      const double corr = denom > 0.0 ? dot / denom : 0.0;
      if (std::fabs(corr) >= tau) dsf.unite(static_cast<int>(a), static_cast<int>(b));
    }
  }
  std::vector<std::vector<NodeId>> groups(n);
  for (std::size_t a = 0; a < n; ++a)
    groups[static_cast<std::size_t>(dsf.find(static_cast<int>(a)))].push_back(
        static_cast<NodeId>(a));
  std::erase_if(groups, [](const auto& g) { return g.empty(); });
  return groups;
}

// Groups first, then learns one tree per group over the candidates restricted
// to that group. The result is a spanning forest with the group partition
// attached.
inline LearnedTopology learn_grouped(const MeasurementSet& ms, double tau,
                                     std::optional<std::vector<NodePair>> candidates = {}) {
  auto groups = group_components(ms, tau);
  if (groups.size() == 1) {
    LearnedTopology topo = learn_structure(ms, std::move(candidates));
    topo.groups = std::move(groups);
    return topo;
  }
  std::vector<int> group_of(ms.node_count(), -1);
  for (std::size_t g = 0; g < groups.size(); ++g)
    for (NodeId a : groups[g]) group_of[static_cast<std::size_t>(a)] = static_cast<int>(g);

  const std::vector<NodePair> all_pairs =
      candidates ? std::move(*candidates) : complete_graph_pairs(static_cast<int>(ms.node_count()));

  LearnedTopology combined;
  combined.sample_count = ms.sample_count();
  for (std::size_t g = 0; g < groups.size(); ++g) {
    if (groups[g].size() == 1) continue;
    // Relabel the group's nodes densely, learn, then map back.
    std::vector<int> local(ms.node_count(), -1);
    for (std::size_t i = 0; i < groups[g].size(); ++i)
      local[static_cast<std::size_t>(groups[g][i])] = static_cast<int>(i);
    MeasurementSet sub;
    sub.meta = ms.meta;
    sub.samples = MatD(ms.sample_count(), groups[g].size());
    for (std::size_t s = 0; s < ms.sample_count(); ++s)
      for (std::size_t i = 0; i < groups[g].size(); ++i)
        sub.samples(s, i) = ms.samples(s, static_cast<std::size_t>(groups[g][i]));
    std::optional<std::vector<NodePair>> sub_pairs;
    sub_pairs.emplace();
    for (const NodePair& p : all_pairs) {
      if (group_of[static_cast<std::size_t>(p.u)] == static_cast<int>(g) &&
          group_of[static_cast<std::size_t>(p.v)] == static_cast<int>(g))
        sub_pairs->push_back({local[static_cast<std::size_t>(p.u)],
                              local[static_cast<std::size_t>(p.v)]});
    }
    LearnedTopology part = learn_structure(sub, std::move(sub_pairs));
    for (const LearnedEdge& e : part.edges)
      combined.edges.push_back({groups[g][static_cast<std::size_t>(e.u)],
                                groups[g][static_cast<std::size_t>(e.v)], e.weight, e.margin});
    combined.total_weight += part.total_weight;
  }
  std::sort(combined.edges.begin(), combined.edges.end(), [](const auto& a, const auto& b) {
    return NodePair(a.u, a.v) < NodePair(b.u, b.v);
  });
  combined.groups = std::move(groups);
  return combined;
}

}  // namespace radnet
