#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "radnet/errors.hpp"
#include "radnet/matrix.hpp"
#include "radnet/network.hpp"
#include "radnet/rng.hpp"

namespace radnet {

namespace stream {
// Tags keeping the counter-based draws of different stages disjoint.
inline constexpr std::uint64_t injection = 0x496e6a65637401ULL;
inline constexpr std::uint64_t noise = 0x4e6f69736501ULL;
inline constexpr std::uint64_t model = 0x4d6f64656c01ULL;
inline constexpr std::uint64_t topology = 0x546f706f01ULL;
inline constexpr std::uint64_t params = 0x506172616d01ULL;
inline constexpr std::uint64_t trial = 0x547269616c01ULL;
}  // namespace stream

struct GaussianMoments {
  double mean = 0.0;
  double variance = 1.0;
};

// Independent Gaussian injections: one (mean, variance) pair per
// non-reference node and commodity. Independence is structural; there is no
// covariance to configure.
class InjectionModel {
public:
  InjectionModel(int node_count, NodeId reference, std::size_t commodities,
                 std::vector<std::vector<GaussianMoments>> moments)
      : node_count_(node_count),
        reference_(reference),
        commodities_(commodities),
        moments_(std::move(moments)) {
    if (moments_.size() != static_cast<std::size_t>(node_count_))
      throw InvalidModel("injection model must cover every node");
    for (int a = 0; a < node_count_; ++a) {
      if (a == reference_) continue;
      const auto& per_node = moments_[static_cast<std::size_t>(a)];
      if (per_node.size() != commodities_)
        throw InvalidModel("node " + std::to_string(a) + " must specify " +
                           std::to_string(commodities_) + " commodities");
      for (const GaussianMoments& g : per_node)
        if (!(g.variance > 0.0))
          throw InvalidModel("injection variance at node " + std::to_string(a) +
                             " must be > 0");
    }
  }

  // Per-node means uniform in [-1.5, -0.5] (net withdrawal) and standard
  // deviations uniform in [0.1, 0.3], drawn deterministically from `seed`.
  static InjectionModel uniform_defaults(const NetworkGraph& graph, std::uint64_t seed) {
    std::vector<std::vector<GaussianMoments>> moments(
        static_cast<std::size_t>(graph.node_count()));
    for (int a = 0; a < graph.node_count(); ++a) {
      if (a == graph.reference()) continue;
      auto& per_node = moments[static_cast<std::size_t>(a)];
      per_node.resize(graph.commodities());
      for (std::size_t k = 0; k < graph.commodities(); ++k) {
        const std::uint64_t key = rng::mix(seed, stream::model, static_cast<std::uint64_t>(a), k);
        const double mean = rng::uniform(rng::mix(key, 1), -1.5, -0.5);
        const double sd = rng::uniform(rng::mix(key, 2), 0.1, 0.3);
        per_node[k] = {mean, sd * sd};
      }
    }
    return InjectionModel(graph.node_count(), graph.reference(), graph.commodities(),
                          std::move(moments));
  }

  static InjectionModel constant(const NetworkGraph& graph, double mean, double stddev) {
    std::vector<std::vector<GaussianMoments>> moments(
        static_cast<std::size_t>(graph.node_count()));
    for (int a = 0; a < graph.node_count(); ++a) {
      if (a == graph.reference()) continue;
      moments[static_cast<std::size_t>(a)].assign(graph.commodities(),
                                                  {mean, stddev * stddev});
    }
    return InjectionModel(graph.node_count(), graph.reference(), graph.commodities(),
                          std::move(moments));
  }

  int node_count() const noexcept { return node_count_; }
  NodeId reference() const noexcept { return reference_; }
  std::size_t commodities() const noexcept { return commodities_; }

  const GaussianMoments& moments(NodeId a, std::size_t commodity) const {
    return moments_[static_cast<std::size_t>(a)][commodity];
  }

private:
  int node_count_;
  NodeId reference_;
  std::size_t commodities_;
  std::vector<std::vector<GaussianMoments>> moments_;
};

// Injection draws, one m x n matrix per commodity. The reference column holds
// the balancing injection (negative sum of the others), so every sample is
// lossless by construction.
struct InjectionSamples {
  std::vector<MatD> commodity;
  std::size_t sample_count() const noexcept {
    return commodity.empty() ? 0 : commodity[0].rows();
  }
};

// Value of the injection draw for one (sample, node, commodity) cell. Pure in
// its arguments: sampling is parallelizable and order-independent.
inline double injection_draw(const InjectionModel& model, std::uint64_t seed, std::size_t sample,
                             NodeId node, std::size_t commodity) {
  const GaussianMoments& g = model.moments(node, commodity);
  return rng::gaussian(
      rng::mix(seed, stream::injection, sample, static_cast<std::uint64_t>(node), commodity),
      g.mean, std::sqrt(g.variance));
}

inline InjectionSamples sample_injections(const InjectionModel& model, std::size_t m,
                                          std::uint64_t seed) {
  if (m < 1) throw InsufficientSamples("need at least one sample");
  const std::size_t n = static_cast<std::size_t>(model.node_count());
  InjectionSamples out;
  out.commodity.assign(model.commodities(), MatD(m, n, 0.0));
  for (std::size_t k = 0; k < model.commodities(); ++k) {
    MatD& mat = out.commodity[k];
    for (std::size_t s = 0; s < m; ++s) {
      auto row = mat.row(s);
      double total = 0.0;
      for (int a = 0; a < model.node_count(); ++a) {
        if (a == model.reference()) continue;
        const double value = injection_draw(model, seed, s, a, k);
        row[static_cast<std::size_t>(a)] = value;
        total += value;
      }
      row[static_cast<std::size_t>(model.reference())] = -total;
    }
  }
  return out;
}

// Edge flow samples on the tree, canonical tree-edge order, one matrix per
// commodity.
struct FlowSamples {
  std::vector<MatD> commodity;
  std::size_t sample_count() const noexcept {
    return commodity.empty() ? 0 : commodity[0].rows();
  }
};

// Flow toward the parent equals the sum of injections over the child's
// descendant set; computed leaves-up in O(nodes) per sample.
inline FlowSamples solve_flows(const RadialTree& tree, const InjectionSamples& injections) {
  const std::size_t m = injections.sample_count();
  const std::size_t edge_count = tree.edges().size();
  FlowSamples flows;
  flows.commodity.assign(injections.commodity.size(), MatD(m, edge_count, 0.0));
  const auto& order = tree.bfs_order();
  for (std::size_t k = 0; k < injections.commodity.size(); ++k) {
    const MatD& inj = injections.commodity[k];
    MatD& out = flows.commodity[k];
    for (std::size_t s = 0; s < m; ++s) {
      const auto in_row = inj.row(s);
      auto flow_row = out.row(s);
      for (std::size_t i = order.size(); i-- > 0;) {
        const NodeId a = order[i];
        if (a == tree.reference()) continue;
        double f = in_row[static_cast<std::size_t>(a)];
        for (NodeId c : tree.children(a))
          f += flow_row[static_cast<std::size_t>(tree.edge_of_child(c))];
        flow_row[static_cast<std::size_t>(tree.edge_of_child(a))] = f;
      }
    }
  }
  return flows;
}

struct MeasurementMeta {
  std::uint64_t seed = 0;
  std::optional<std::uint64_t> noise_seed;
  double noise_frac = 0.0;
  std::uint64_t network_hash = 0;
  std::size_t samples = 0;
};

// m x n nodal potential samples (reference column included) plus provenance.
struct MeasurementSet {
  MatD samples;
  MeasurementMeta meta;
  std::size_t sample_count() const noexcept { return samples.rows(); }
  std::size_t node_count() const noexcept { return samples.cols(); }
};

// Potentials from the telescoping relation: pi(child) = pi(parent) + g(flow).
// Columns for nodes outside the tree (forest use) stay zero.
inline MeasurementSet solve_potentials(const NetworkGraph& graph, const RadialTree& tree,
                                       const FlowSamples& flows, double ref_potential = 1.0) {
  const std::size_t m = flows.sample_count();
  const std::size_t commodities = flows.commodity.size();
  MeasurementSet ms;
  ms.samples = MatD(m, static_cast<std::size_t>(tree.graph_node_count()), 0.0);
  ms.meta.samples = m;
  ms.meta.network_hash = graph.structural_hash();

  // Specs resolved once, in bfs order.
  const auto& order = tree.bfs_order();
  std::vector<const FlowFunctionSpec*> spec_of_node(
      static_cast<std::size_t>(tree.graph_node_count()), nullptr);
  for (const TreeEdgeRef& e : tree.edges())
    spec_of_node[static_cast<std::size_t>(e.child)] = &graph.edges()[static_cast<std::size_t>(e.graph_edge)].flow;

  std::vector<double> f(commodities, 0.0);
  for (std::size_t s = 0; s < m; ++s) {
    auto pot_row = ms.samples.row(s);
    pot_row[static_cast<std::size_t>(tree.reference())] = ref_potential;
    for (const NodeId a : order) {
      if (a == tree.reference()) continue;
      const int edge = tree.edge_of_child(a);
      for (std::size_t k = 0; k < commodities; ++k)
        f[k] = flows.commodity[k](s, static_cast<std::size_t>(edge));
      const FlowFunctionSpec& spec = *spec_of_node[static_cast<std::size_t>(a)];
      const double drop = commodities == 1 ? eval_g1(spec, f[0]) : eval_g(spec, f);
      pot_row[static_cast<std::size_t>(a)] = pot_row[static_cast<std::size_t>(*tree.parent(a))] + drop;
    }
  }
  return ms;
}

struct NoiseSpec {
  double fraction = 0.0;  // of the average pre-noise potential variance
  std::uint64_t seed = 0;
};

// Mean over non-reference columns of the unbiased per-column sample variance.
inline double average_potential_variance(const MeasurementSet& ms, NodeId reference) {
  const std::size_t m = ms.sample_count();
  if (m < 2) throw InsufficientSamples("need m >= 2 to estimate potential variance");
  double total = 0.0;
  std::size_t counted = 0;
  for (std::size_t c = 0; c < ms.node_count(); ++c) {
    if (c == static_cast<std::size_t>(reference)) continue;
    double mean = 0.0;
    for (std::size_t s = 0; s < m; ++s) mean += ms.samples(s, c);
    mean /= static_cast<double>(m);
    double ss = 0.0;
    for (std::size_t s = 0; s < m; ++s) {
      const double d = ms.samples(s, c) - mean;
      ss += d * d;
    }
    total += ss / static_cast<double>(m - 1);
    ++counted;
  }
  return counted == 0 ? 0.0 : total / static_cast<double>(counted);
}

// Additive Gaussian measurement noise with variance fraction * (average
// pre-noise potential variance), i.i.d. across entries.
inline MeasurementSet add_noise(const MeasurementSet& ms, const NoiseSpec& noise,
                                NodeId reference) {
  if (noise.fraction < 0.0) throw InvalidSpec("noise fraction must be >= 0");
  MeasurementSet out = ms;
  out.meta.noise_frac = noise.fraction;
  out.meta.noise_seed = noise.seed;
  if (noise.fraction == 0.0) return out;
  const double sd = std::sqrt(noise.fraction * average_potential_variance(ms, reference));
  for (std::size_t s = 0; s < ms.sample_count(); ++s)
    for (std::size_t c = 0; c < ms.node_count(); ++c)
      out.samples(s, c) += sd * rng::gaussian(rng::mix(noise.seed, stream::noise, s, c));
  return out;
}

// Convenience composition: injections -> flows -> potentials.
inline MeasurementSet simulate(const NetworkGraph& graph, const RadialTree& tree,
                               const InjectionModel& model, std::size_t m, std::uint64_t seed,
                               double ref_potential = 1.0) {
  const InjectionSamples injections = sample_injections(model, m, seed);
  const FlowSamples flows = solve_flows(tree, injections);
  MeasurementSet ms = solve_potentials(graph, tree, flows, ref_potential);
  ms.meta.seed = seed;
  return ms;
}

// For users holding raw magnitudes (voltage, pressure): potentials are their
// squares.
inline MatD elementwise_square(const MatD& raw) {
  MatD out = raw;
  for (double& x : out.storage()) x *= x;
  return out;
}

}  // namespace radnet
