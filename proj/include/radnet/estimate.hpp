#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "radnet/errors.hpp"
#include "radnet/learn.hpp"
#include "radnet/network.hpp"
#include "radnet/simulate.hpp"

namespace radnet {

// Builds the operational tree implied by a learned edge list, resolving each
// pair against the candidate graph so edges keep their flow specs. Throws
// UnknownEdgeSpec when a learned edge is not a candidate edge.
inline RadialTree tree_from_edges(const NetworkGraph& graph, std::span<const NodePair> edges) {
  std::vector<CandidateEdge> resolved = graph.edges();
  for (CandidateEdge& e : resolved) e.operational = false;
  for (const NodePair& p : edges) {
    const auto idx = graph.find_edge(p.u, p.v);
    if (!idx)
      throw UnknownEdgeSpec("edge (" + std::to_string(p.u) + "," + std::to_string(p.v) +
                            ") has no flow spec in the candidate graph");
    resolved[static_cast<std::size_t>(*idx)].operational = true;
  }
  return validate_radial(NetworkGraph(graph.node_count(), graph.reference(), std::move(resolved)));
}

// Inverts each tree edge's flow function on the per-sample potential drop.
// Requires single-commodity specs; a multi-commodity linear edge has one
// equation in several unknowns.
inline FlowSamples recover_flows(const NetworkGraph& graph, const RadialTree& tree,
                                 const MeasurementSet& ms) {
  if (ms.node_count() != static_cast<std::size_t>(tree.graph_node_count()))
    throw SizeMismatch("measurement set covers " + std::to_string(ms.node_count()) +
                       " nodes, tree expects " + std::to_string(tree.graph_node_count()));
  const std::size_t m = ms.sample_count();
  FlowSamples flows;
  flows.commodity.assign(1, MatD(m, tree.edges().size(), 0.0));
  MatD& out = flows.commodity[0];
  for (std::size_t e = 0; e < tree.edges().size(); ++e) {
    const TreeEdgeRef& edge = tree.edges()[e];
    const FlowFunctionSpec& spec = graph.edges()[static_cast<std::size_t>(edge.graph_edge)].flow;
    if (spec.commodities() != 1)
      throw NotInvertible("edge (" + std::to_string(edge.child) + "," +
                          std::to_string(edge.parent) + ") is multi-commodity");
    const std::size_t cu = static_cast<std::size_t>(edge.child);
    const std::size_t cv = static_cast<std::size_t>(edge.parent);
    for (std::size_t s = 0; s < m; ++s)
      out(s, e) = invert_g(spec, ms.samples(s, cu) - ms.samples(s, cv));
  }
  return flows;
}

// Conservation at each node: injection equals the flow toward the parent
// minus the flows arriving from children (the reference has no parent flow).
inline InjectionSamples recover_injections(const RadialTree& tree, const FlowSamples& flows) {
  const std::size_t m = flows.sample_count();
  InjectionSamples injections;
  injections.commodity.assign(flows.commodity.size(),
                              MatD(m, static_cast<std::size_t>(tree.graph_node_count()), 0.0));
  for (std::size_t k = 0; k < flows.commodity.size(); ++k) {
    const MatD& f = flows.commodity[k];
    MatD& p = injections.commodity[k];
    for (std::size_t s = 0; s < m; ++s) {
      for (const NodeId a : tree.nodes()) {
        double value = 0.0;
        if (a != tree.reference())
          value = f(s, static_cast<std::size_t>(tree.edge_of_child(a)));
        for (const NodeId c : tree.children(a))
          value -= f(s, static_cast<std::size_t>(tree.edge_of_child(c)));
        p(s, static_cast<std::size_t>(a)) = value;
      }
    }
  }
  return injections;
}

struct NodeMomentEstimate {
  NodeId node = 0;
  std::vector<double> mean;      // per commodity
  std::vector<double> variance;  // per commodity, unbiased
};

struct InjectionEstimate {
  std::vector<NodeMomentEstimate> nodes;
  std::size_t sample_count = 0;
  std::size_t commodities = 1;
  // Estimates from noisy potentials inherit the measurement noise; no
  // de-noising is attempted.
  bool biased = false;
};

inline InjectionEstimate injection_statistics(const InjectionSamples& samples,
                                              bool biased = false) {
  InjectionEstimate est;
  est.commodities = samples.commodity.size();
  est.sample_count = samples.sample_count();
  est.biased = biased;
  if (est.sample_count < 2) throw InsufficientSamples("statistics need m >= 2 samples");
  const std::size_t n = samples.commodity[0].cols();
  const double m = static_cast<double>(est.sample_count);
  est.nodes.resize(n);
  for (std::size_t a = 0; a < n; ++a) {
    NodeMomentEstimate& node = est.nodes[a];
    node.node = static_cast<NodeId>(a);
    node.mean.resize(est.commodities);
    node.variance.resize(est.commodities);
    for (std::size_t k = 0; k < est.commodities; ++k) {
      const MatD& mat = samples.commodity[k];
      double mean = 0.0;
      for (std::size_t s = 0; s < est.sample_count; ++s) mean += mat(s, a);
      mean /= m;
      double ss = 0.0;
      for (std::size_t s = 0; s < est.sample_count; ++s) {
        const double d = mat(s, a) - mean;
        ss += d * d;
      }
      node.mean[k] = mean;
      node.variance[k] = ss / (m - 1.0);
    }
  }
  return est;
}

}  // namespace radnet
