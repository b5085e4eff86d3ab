#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "radnet/errors.hpp"
#include "radnet/flow.hpp"
#include "radnet/matrix.hpp"

namespace radnet {

using NodeId = int;

// A permissible edge of the loopy candidate graph. `operational` is ground
// truth known to the simulator only; the learner never reads it.
struct CandidateEdge {
  NodeId u = 0;
  NodeId v = 0;
  FlowFunctionSpec flow;
  bool operational = false;
};

namespace detail {
inline std::pair<NodeId, NodeId> ordered(NodeId a, NodeId b) {
  return a < b ? std::pair{a, b} : std::pair{b, a};
}
}  // namespace detail

// Candidate graph: dense 0-based nodes, an explicit reference node, and the
// permissible edge set. Immutable after construction.
class NetworkGraph {
public:
  NetworkGraph(int node_count, NodeId reference, std::vector<CandidateEdge> edges)
      : node_count_(node_count), reference_(reference), edges_(std::move(edges)) {
    if (node_count_ <= 0) throw InvalidSpec("network needs at least one node");
    if (reference_ < 0 || reference_ >= node_count_)
      throw UnknownNode("reference node " + std::to_string(reference_) + " out of range");
    std::vector<char> touched(static_cast<std::size_t>(node_count_), 0);
    std::size_t commodities = 0;
    for (std::size_t i = 0; i < edges_.size(); ++i) {
      const CandidateEdge& e = edges_[i];
      if (e.u < 0 || e.u >= node_count_ || e.v < 0 || e.v >= node_count_)
        throw UnknownNode("edge (" + std::to_string(e.u) + "," + std::to_string(e.v) +
                          ") references a node out of range");
      if (e.u == e.v)
        throw InvalidSpec("self-loop at node " + std::to_string(e.u));
      validate_spec(e.flow);
      if (i == 0)
        commodities = e.flow.commodities();
      else if (e.flow.commodities() != commodities)
        throw DimensionMismatch("all edges must agree on the commodity count");
      const auto key = detail::ordered(e.u, e.v);
      if (!index_.emplace(key, static_cast<int>(i)).second)
        throw InvalidSpec("duplicate edge (" + std::to_string(key.first) + "," +
                          std::to_string(key.second) + ")");
      touched[static_cast<std::size_t>(e.u)] = 1;
      touched[static_cast<std::size_t>(e.v)] = 1;
    }
    commodities_ = commodities == 0 ? 1 : commodities;
    if (node_count_ > 1) {
      for (int a = 0; a < node_count_; ++a)
        if (!touched[static_cast<std::size_t>(a)])
          throw Disconnected("node " + std::to_string(a) + " has no candidate edge");
    }
  }

  int node_count() const noexcept { return node_count_; }
  NodeId reference() const noexcept { return reference_; }
  const std::vector<CandidateEdge>& edges() const noexcept { return edges_; }
  std::size_t commodities() const noexcept { return commodities_; }

  std::optional<int> find_edge(NodeId a, NodeId b) const {
    const auto it = index_.find(detail::ordered(a, b));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  // FNV-1a over the canonical structural content; stored in measurement
  // metadata so downstream stages can detect mismatched inputs.
  std::uint64_t structural_hash() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    const auto absorb = [&h](std::uint64_t word) {
      for (int b = 0; b < 8; ++b) {
        h ^= (word >> (8 * b)) & 0xffULL;
        h *= 0x100000001b3ULL;
      }
    };
    const auto absorb_double = [&](double d) {
      std::uint64_t bits;
      static_assert(sizeof(bits) == sizeof(d));
      __builtin_memcpy(&bits, &d, sizeof(bits));
      absorb(bits);
    };
    absorb(static_cast<std::uint64_t>(node_count_));
    absorb(static_cast<std::uint64_t>(reference_));
    for (const CandidateEdge& e : edges_) {
      absorb(static_cast<std::uint64_t>(e.u));
      absorb(static_cast<std::uint64_t>(e.v));
      absorb(static_cast<std::uint64_t>(e.operational));
      absorb(static_cast<std::uint64_t>(e.flow.family));
      for (double c : e.flow.coeff) absorb_double(c);
      absorb_double(e.flow.alpha);
      absorb_double(e.flow.beta);
      absorb_double(e.flow.gamma);
    }
    return h;
  }

private:
  int node_count_;
  NodeId reference_;
  std::vector<CandidateEdge> edges_;
  std::size_t commodities_ = 1;
  std::map<std::pair<NodeId, NodeId>, int> index_;
};

// One operational edge, oriented toward the reference: `child` is the far
// endpoint, `parent` the one nearer the reference.
struct TreeEdgeRef {
  NodeId child = -1;
  NodeId parent = -1;
  int graph_edge = -1;  // index into NetworkGraph::edges()
};

// A validated radial (spanning-tree) component. May cover a subset of the
// graph's nodes when produced by validate_forest. Immutable.
class RadialTree {
public:
  RadialTree(int graph_node_count, NodeId reference, const std::vector<NodeId>& members,
             std::vector<NodeId> parent, std::vector<int> parent_edge, std::vector<int> depth,
             std::vector<std::vector<NodeId>> children, std::vector<NodeId> bfs)
      : graph_node_count_(graph_node_count),
        reference_(reference),
        nodes_(members),
        parent_(std::move(parent)),
        parent_graph_edge_(std::move(parent_edge)),
        depth_(std::move(depth)),
        children_(std::move(children)),
        bfs_order_(std::move(bfs)),
        member_(static_cast<std::size_t>(graph_node_count), 0),
        edge_of_child_(static_cast<std::size_t>(graph_node_count), -1) {
    std::sort(nodes_.begin(), nodes_.end());
    for (NodeId a : nodes_) member_[static_cast<std::size_t>(a)] = 1;
    // Canonical tree-edge order: ascending child id. With this convention the
    // k-th edge is the parent edge of the k-th non-reference member.
    for (NodeId a : nodes_) {
      if (a == reference_) continue;
      const int idx = static_cast<int>(edges_.size());
      edges_.push_back({a, parent_[static_cast<std::size_t>(a)],
                        parent_graph_edge_[static_cast<std::size_t>(a)]});
      edge_of_child_[static_cast<std::size_t>(a)] = idx;
    }
  }

  int graph_node_count() const noexcept { return graph_node_count_; }
  int node_count() const noexcept { return static_cast<int>(nodes_.size()); }
  NodeId reference() const noexcept { return reference_; }
  const std::vector<NodeId>& nodes() const noexcept { return nodes_; }
  const std::vector<NodeId>& bfs_order() const noexcept { return bfs_order_; }
  const std::vector<TreeEdgeRef>& edges() const noexcept { return edges_; }

  bool contains(NodeId a) const noexcept {
    return a >= 0 && a < graph_node_count_ && member_[static_cast<std::size_t>(a)];
  }

  void require(NodeId a) const {
    if (!contains(a)) throw UnknownNode("node " + std::to_string(a) + " is not in the tree");
  }

  // Parent of `a`; the reference has none.
  std::optional<NodeId> parent(NodeId a) const {
    require(a);
    if (a == reference_) return std::nullopt;
    return parent_[static_cast<std::size_t>(a)];
  }

  int depth(NodeId a) const {
    require(a);
    return depth_[static_cast<std::size_t>(a)];
  }

  const std::vector<NodeId>& children(NodeId a) const {
    require(a);
    return children_[static_cast<std::size_t>(a)];
  }

  // Tree-edge index of the edge joining `a` to its parent; -1 for reference.
  int edge_of_child(NodeId a) const {
    require(a);
    return edge_of_child_[static_cast<std::size_t>(a)];
  }

private:
  int graph_node_count_;
  NodeId reference_;
  std::vector<NodeId> nodes_;
  std::vector<NodeId> parent_;
  std::vector<int> parent_graph_edge_;
  std::vector<int> depth_;
  std::vector<std::vector<NodeId>> children_;
  std::vector<NodeId> bfs_order_;
  std::vector<char> member_;
  std::vector<int> edge_of_child_;
  std::vector<TreeEdgeRef> edges_;
};

namespace detail {

struct UnionFind {
  explicit UnionFind(std::size_t n) : parent(n) {
    for (std::size_t i = 0; i < n; ++i) parent[i] = static_cast<int>(i);
  }
  int find(int x) {
    while (parent[static_cast<std::size_t>(x)] != x) {
      parent[static_cast<std::size_t>(x)] =
          parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
      x = parent[static_cast<std::size_t>(x)];
    }
    return x;
  }
  bool unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent[static_cast<std::size_t>(std::max(a, b))] = std::min(a, b);
    return true;
  }
  std::vector<int> parent;
};

// BFS over the operational adjacency from `root`, producing the oriented
// component tree.
inline RadialTree build_component(const NetworkGraph& graph,
                                  const std::vector<std::vector<std::pair<NodeId, int>>>& adj,
                                  NodeId root) {
  const std::size_t n = static_cast<std::size_t>(graph.node_count());
  std::vector<NodeId> parent(n, -1);
  std::vector<int> parent_edge(n, -1), depth(n, 0);
  std::vector<std::vector<NodeId>> children(n);
  std::vector<NodeId> order, members;
  std::vector<char> seen(n, 0);
  order.push_back(root);
  seen[static_cast<std::size_t>(root)] = 1;
  for (std::size_t head = 0; head < order.size(); ++head) {
    const NodeId at = order[head];
    members.push_back(at);
    for (const auto& [next, edge] : adj[static_cast<std::size_t>(at)]) {
      if (seen[static_cast<std::size_t>(next)]) continue;
      seen[static_cast<std::size_t>(next)] = 1;
      parent[static_cast<std::size_t>(next)] = at;
      parent_edge[static_cast<std::size_t>(next)] = edge;
      depth[static_cast<std::size_t>(next)] = depth[static_cast<std::size_t>(at)] + 1;
      children[static_cast<std::size_t>(at)].push_back(next);
      order.push_back(next);
    }
  }
  for (auto& c : children) std::sort(c.begin(), c.end());
  return RadialTree(graph.node_count(), root, members, std::move(parent), std::move(parent_edge),
                    std::move(depth), std::move(children), std::move(order));
}

inline std::vector<std::vector<std::pair<NodeId, int>>> operational_adjacency(
    const NetworkGraph& graph, bool reject_cycles) {
  const std::size_t n = static_cast<std::size_t>(graph.node_count());
  std::vector<std::vector<std::pair<NodeId, int>>> adj(n);
  UnionFind uf(n);
  for (std::size_t i = 0; i < graph.edges().size(); ++i) {
    const CandidateEdge& e = graph.edges()[i];
    if (!e.operational) continue;
    if (!uf.unite(e.u, e.v) && reject_cycles)
      throw CycleDetected("operational edge (" + std::to_string(e.u) + "," +
                          std::to_string(e.v) + ") closes a cycle");
    adj[static_cast<std::size_t>(e.u)].push_back({e.v, static_cast<int>(i)});
    adj[static_cast<std::size_t>(e.v)].push_back({e.u, static_cast<int>(i)});
  }
  return adj;
}

}  // namespace detail

// Strict validation: the operational edges must form a single spanning tree
// rooted at the graph's reference node.
inline RadialTree validate_radial(const NetworkGraph& graph) {
  const auto adj = detail::operational_adjacency(graph, /*reject_cycles=*/true);
  RadialTree tree = detail::build_component(graph, adj, graph.reference());
  if (tree.node_count() != graph.node_count()) {
    for (NodeId a = 0; a < graph.node_count(); ++a)
      if (!tree.contains(a))
        throw Disconnected("node " + std::to_string(a) +
                           " is unreachable from the reference over operational edges");
  }
  std::size_t operational = 0;
  for (const CandidateEdge& e : graph.edges()) operational += e.operational ? 1 : 0;
  if (operational != static_cast<std::size_t>(graph.node_count()) - 1)
    throw WrongEdgeCount("expected " + std::to_string(graph.node_count() - 1) +
                         " operational edges, found " + std::to_string(operational));
  return tree;
}

// Relaxed validation: the operational edges may form a forest. Each component
// becomes its own RadialTree; the component holding the graph reference keeps
// it, any other is rooted at its smallest node id. Components are ordered by
// their smallest node id.
inline std::vector<RadialTree> validate_forest(const NetworkGraph& graph) {
  const auto adj = detail::operational_adjacency(graph, /*reject_cycles=*/true);
  std::vector<char> assigned(static_cast<std::size_t>(graph.node_count()), 0);
  std::vector<RadialTree> forest;
  const auto grow = [&](NodeId root) {
    RadialTree tree = detail::build_component(graph, adj, root);
    for (NodeId a : tree.nodes()) assigned[static_cast<std::size_t>(a)] = 1;
    forest.push_back(std::move(tree));
  };
  if (graph.node_count() > 0) grow(graph.reference());
  for (NodeId a = 0; a < graph.node_count(); ++a)
    if (!assigned[static_cast<std::size_t>(a)]) grow(a);
  std::sort(forest.begin(), forest.end(), [](const RadialTree& x, const RadialTree& y) {
    return x.nodes().front() < y.nodes().front();
  });
  return forest;
}

// Edge sequence from `a` to the reference; empty for the reference itself.
inline std::vector<TreeEdgeRef> path_to_reference(const RadialTree& tree, NodeId a) {
  tree.require(a);
  std::vector<TreeEdgeRef> path;
  NodeId at = a;
  while (at != tree.reference()) {
    path.push_back(tree.edges()[static_cast<std::size_t>(tree.edge_of_child(at))]);
    at = *tree.parent(at);
  }
  return path;
}

// All nodes whose reference path passes through `a`, including `a` itself.
// Sorted ascending.
inline std::vector<NodeId> descendants(const RadialTree& tree, NodeId a) {
  tree.require(a);
  std::vector<NodeId> out;
  out.push_back(a);
  for (std::size_t head = 0; head < out.size(); ++head)
    for (NodeId c : tree.children(out[head])) out.push_back(c);
  std::sort(out.begin(), out.end());
  return out;
}

// Reduced incidence matrix of the tree and its 0/1 inverse.
//
// Rows of `m` are tree edges in canonical order, columns are non-reference
// nodes ascending; +1 at the child, -1 at the parent (dropped when the parent
// is the reference). `m_inverse(a, r)` is 1 exactly when edge r lies on the
// reference path of node a, and the product of the two matrices is the
// identity in integer arithmetic.
struct IncidenceSystem {
  MatI m;
  MatI m_inverse;
  std::vector<NodeId> node_order;  // column (and inverse-row) node ids
};

inline IncidenceSystem reduced_incidence(const RadialTree& tree) {
  std::vector<NodeId> node_order;
  for (NodeId a : tree.nodes())
    if (a != tree.reference()) node_order.push_back(a);
  const std::size_t k = node_order.size();
  std::vector<int> column(static_cast<std::size_t>(tree.graph_node_count()), -1);
  for (std::size_t i = 0; i < k; ++i) column[static_cast<std::size_t>(node_order[i])] = static_cast<int>(i);

  IncidenceSystem sys;
  sys.node_order = node_order;
  sys.m = MatI(k, k, 0);
  sys.m_inverse = MatI(k, k, 0);
  for (std::size_t r = 0; r < k; ++r) {
    const TreeEdgeRef& e = tree.edges()[r];
    sys.m(r, static_cast<std::size_t>(column[static_cast<std::size_t>(e.child)])) = 1;
    if (e.parent != tree.reference())
      sys.m(r, static_cast<std::size_t>(column[static_cast<std::size_t>(e.parent)])) = -1;
  }
  for (std::size_t row = 0; row < k; ++row)
    for (const TreeEdgeRef& e : path_to_reference(tree, node_order[row]))
      sys.m_inverse(row, static_cast<std::size_t>(tree.edge_of_child(e.child))) = 1;
  return sys;
}

}  // namespace radnet
