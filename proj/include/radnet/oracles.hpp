#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "radnet/errors.hpp"
#include "radnet/learn.hpp"
#include "radnet/matrix.hpp"
#include "radnet/network.hpp"
#include "radnet/simulate.hpp"

namespace radnet {

enum class Verdict { pass, fail, inconclusive };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::pass: return "pass";
    case Verdict::fail: return "fail";
    case Verdict::inconclusive: return "inconclusive";
  }
  return "?";
}

enum class PhiProvenance { exact_linear, monte_carlo };

// Symmetric all-pairs table of phi = Var(pi_a - pi_b), with per-pair standard
// errors when estimated by Monte Carlo (zero for the exact computation).
struct PhiTable {
  MatD phi;
  MatD se;
  PhiProvenance provenance = PhiProvenance::exact_linear;
  std::size_t sample_count = 0;
};

// Closed-form phi for networks whose operational edges all carry linear flow
// functions. With independent injections, the covariance of the drops on two
// edges is
//
//   Omega(e, e') = sum_i c_i(e) c_i(e') sum_{r in D(e) and D(e')} var(r, i)
//
// (commodities are mutually independent, so cross-commodity terms vanish),
// and phi_ab expands over the symmetric difference of the two reference
// paths, including the cross term, which for tree paths is identically zero
// because the two branches have disjoint descendant sets. It is computed, not
// assumed.
inline PhiTable exact_phi_linear(const NetworkGraph& graph, const RadialTree& tree,
                                 const InjectionModel& model) {
  const std::size_t edge_count = tree.edges().size();
  const std::size_t n = static_cast<std::size_t>(tree.graph_node_count());
  for (const TreeEdgeRef& e : tree.edges()) {
    const FlowFunctionSpec& spec = graph.edges()[static_cast<std::size_t>(e.graph_edge)].flow;
    if (spec.family != FlowFamily::linear_multi)
      throw NonlinearSpec("edge (" + std::to_string(e.child) + "," + std::to_string(e.parent) +
                          ") is not linear; use monte_carlo_phi");
    if (spec.commodities() != model.commodities())
      throw DimensionMismatch("flow spec and injection model disagree on commodities");
  }

  // Descendant masks per tree edge (the child's descendant set).
  std::vector<std::vector<char>> desc(edge_count, std::vector<char>(n, 0));
  for (std::size_t e = 0; e < edge_count; ++e)
    for (NodeId r : descendants(tree, tree.edges()[e].child))
      desc[e][static_cast<std::size_t>(r)] = 1;

  const std::size_t commodities = model.commodities();
  MatD omega(edge_count, edge_count, 0.0);
  for (std::size_t e = 0; e < edge_count; ++e) {
    const FlowFunctionSpec& se_ = graph.edges()[static_cast<std::size_t>(tree.edges()[e].graph_edge)].flow;
    for (std::size_t f = e; f < edge_count; ++f) {
      const FlowFunctionSpec& sf = graph.edges()[static_cast<std::size_t>(tree.edges()[f].graph_edge)].flow;
      double total = 0.0;
      for (std::size_t k = 0; k < commodities; ++k) {
        double shared = 0.0;
        for (std::size_t r = 0; r < n; ++r)
          if (desc[e][r] && desc[f][r] && static_cast<NodeId>(r) != tree.reference())
            shared += model.moments(static_cast<NodeId>(r), k).variance;
        total += se_.coeff[k] * sf.coeff[k] * shared;
      }
      omega(e, f) = total;
      omega(f, e) = total;
    }
  }

  // Path-edge membership per node.
  std::vector<std::vector<char>> on_path(n, std::vector<char>(edge_count, 0));
  for (NodeId a : tree.nodes())
    for (const TreeEdgeRef& e : path_to_reference(tree, a))
      on_path[static_cast<std::size_t>(a)][static_cast<std::size_t>(tree.edge_of_child(e.child))] = 1;

  PhiTable table;
  table.provenance = PhiProvenance::exact_linear;
  table.phi = MatD(n, n, 0.0);
  table.se = MatD(n, n, 0.0);
  std::vector<std::size_t> only_a, only_b;
  for (NodeId a : tree.nodes()) {
    for (NodeId b : tree.nodes()) {
      if (b <= a) continue;
      only_a.clear();
      only_b.clear();
      for (std::size_t e = 0; e < edge_count; ++e) {
        const bool in_a = on_path[static_cast<std::size_t>(a)][e];
        const bool in_b = on_path[static_cast<std::size_t>(b)][e];
        if (in_a && !in_b) only_a.push_back(e);
        if (in_b && !in_a) only_b.push_back(e);
      }
      double value = 0.0;
      for (std::size_t e : only_a)
        for (std::size_t f : only_a) value += omega(e, f);
      for (std::size_t e : only_b)
        for (std::size_t f : only_b) value += omega(e, f);
      for (std::size_t e : only_b)
        for (std::size_t f : only_a) value -= 2.0 * omega(e, f);
      table.phi(static_cast<std::size_t>(a), static_cast<std::size_t>(b)) = value;
      table.phi(static_cast<std::size_t>(b), static_cast<std::size_t>(a)) = value;
    }
  }
  return table;
}

// Monte-Carlo phi from a fresh noise-free simulation. Accumulates shifted
// moments up to fourth order per pair, yielding the unbiased variance and an
// asymptotic standard error sqrt((m4 - m2^2) / m).
inline PhiTable monte_carlo_phi(const NetworkGraph& graph, const RadialTree& tree,
                                const InjectionModel& model, std::size_t m, std::uint64_t seed) {
  if (m < 1000) throw InsufficientSamples("monte_carlo_phi needs m >= 1000");
  const std::size_t n = static_cast<std::size_t>(tree.graph_node_count());
  const std::size_t commodities = model.commodities();
  const auto& order = tree.bfs_order();

  std::vector<const FlowFunctionSpec*> spec_of_node(n, nullptr);
  for (const TreeEdgeRef& e : tree.edges())
    spec_of_node[static_cast<std::size_t>(e.child)] =
        &graph.edges()[static_cast<std::size_t>(e.graph_edge)].flow;

  const std::size_t pair_count = n * (n - 1) / 2;
  std::vector<double> shift(pair_count, 0.0);
  std::vector<double> s1(pair_count, 0.0), s2(pair_count, 0.0), s3(pair_count, 0.0),
      s4(pair_count, 0.0);

  Mat<double> inj(commodities, n, 0.0);
  std::vector<double> flow(commodities * (n > 0 ? n : 1), 0.0);
  std::vector<double> pot(n, 0.0);
  std::vector<double> f(commodities, 0.0);

  for (std::size_t s = 0; s < m; ++s) {
    for (std::size_t k = 0; k < commodities; ++k)
      for (NodeId a : tree.nodes())
        if (a != tree.reference())
          inj(k, static_cast<std::size_t>(a)) = injection_draw(model, seed, s, a, k);
    // Flows leaves-up, then potentials root-down.
    for (std::size_t i = order.size(); i-- > 0;) {
      const NodeId a = order[i];
      if (a == tree.reference()) continue;
      const std::size_t ea = static_cast<std::size_t>(tree.edge_of_child(a));
      for (std::size_t k = 0; k < commodities; ++k) {
        double total = inj(k, static_cast<std::size_t>(a));
        for (NodeId c : tree.children(a))
          total += flow[k * n + static_cast<std::size_t>(tree.edge_of_child(c))];
        flow[k * n + ea] = total;
      }
    }
    pot[static_cast<std::size_t>(tree.reference())] = 0.0;
    for (const NodeId a : order) {
      if (a == tree.reference()) continue;
      const std::size_t ea = static_cast<std::size_t>(tree.edge_of_child(a));
      for (std::size_t k = 0; k < commodities; ++k) f[k] = flow[k * n + ea];
      const FlowFunctionSpec& spec = *spec_of_node[static_cast<std::size_t>(a)];
      const double drop = commodities == 1 ? eval_g1(spec, f[0]) : eval_g(spec, f);
      pot[static_cast<std::size_t>(a)] = pot[static_cast<std::size_t>(*tree.parent(a))] + drop;
    }
    std::size_t p = 0;
    for (std::size_t a = 0; a < n; ++a) {
      for (std::size_t b = a + 1; b < n; ++b, ++p) {
        const double d = pot[a] - pot[b];
        if (s == 0) shift[p] = d;
        const double e = d - shift[p];
        const double e2 = e * e;
        s1[p] += e;
        s2[p] += e2;
        s3[p] += e2 * e;
        s4[p] += e2 * e2;
      }
    }
  }

  PhiTable table;
  table.provenance = PhiProvenance::monte_carlo;
  table.sample_count = m;
  table.phi = MatD(n, n, 0.0);
  table.se = MatD(n, n, 0.0);
  const double dm = static_cast<double>(m);
  std::size_t p = 0;
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b, ++p) {
      const double mean = s1[p] / dm;
      const double m2 = std::max(0.0, s2[p] / dm - mean * mean);
      const double m4 =
          std::max(0.0, (s4[p] - 4.0 * mean * s3[p] + 6.0 * mean * mean * s2[p]) / dm -
                            3.0 * mean * mean * mean * mean);
      const double variance = m2 * dm / (dm - 1.0);
      const double se = std::sqrt(std::max(0.0, m4 - m2 * m2) / dm);
      table.phi(a, b) = variance;
      table.phi(b, a) = variance;
      table.se(a, b) = se;
      table.se(b, a) = se;
    }
  }
  return table;
}

struct OrderingViolation {
  NodeId a = 0, b = 0, c = 0;
  double phi_ab = 0.0, phi_ac = 0.0, slack = 0.0;
};

struct OrderingReport {
  Verdict verdict = Verdict::pass;
  std::size_t triples = 0;
  std::size_t confirmed = 0;
  std::size_t inconclusive = 0;
  std::vector<OrderingViolation> violations;
};

namespace detail {
// Node sequence a .. c along the unique tree path, endpoints included.
inline std::vector<NodeId> tree_path_nodes(const RadialTree& tree, NodeId a, NodeId c) {
  std::vector<NodeId> up_a{a}, up_c{c};
  NodeId x = a, y = c;
  while (x != y) {
    if (tree.depth(x) >= tree.depth(y)) {
      x = *tree.parent(x);
      up_a.push_back(x);
    } else {
      y = *tree.parent(y);
      up_c.push_back(y);
    }
  }
  up_a.insert(up_a.end(), up_c.rbegin() + 1, up_c.rend());
  return up_a;
}
}  // namespace detail

// Checks phi_ab < phi_ac over every ordered triple (a, b, c) with b strictly
// interior on the a-c tree path. Exact tables are held to the strict
// inequality; Monte-Carlo tables get a slack of 3 combined standard errors,
// with triples inside the slack reported as inconclusive rather than failed.
inline OrderingReport check_ordering(const RadialTree& tree, const PhiTable& table) {
  OrderingReport report;
  const bool exact = table.provenance == PhiProvenance::exact_linear;
  for (NodeId a : tree.nodes()) {
    for (NodeId c : tree.nodes()) {
      if (a == c) continue;
      const std::vector<NodeId> path = detail::tree_path_nodes(tree, a, c);
      for (std::size_t i = 1; i + 1 < path.size(); ++i) {
        const NodeId b = path[i];
        ++report.triples;
        const double phi_ab = table.phi(static_cast<std::size_t>(a), static_cast<std::size_t>(b));
        const double phi_ac = table.phi(static_cast<std::size_t>(a), static_cast<std::size_t>(c));
        double slack = 0.0;
        if (!exact) {
          const double se_ab = table.se(static_cast<std::size_t>(a), static_cast<std::size_t>(b));
          const double se_ac = table.se(static_cast<std::size_t>(a), static_cast<std::size_t>(c));
          slack = 3.0 * std::sqrt(se_ab * se_ab + se_ac * se_ac);
        }
        if (phi_ac - phi_ab > slack) {
          ++report.confirmed;
        } else if (phi_ab - phi_ac > slack) {
          report.violations.push_back({a, b, c, phi_ab, phi_ac, slack});
        } else if (exact) {
          // slack is zero: equality violates the strict inequality.
          report.violations.push_back({a, b, c, phi_ab, phi_ac, slack});
        } else {
          ++report.inconclusive;
        }
      }
    }
  }
  if (!report.violations.empty())
    report.verdict = Verdict::fail;
  else
    report.verdict = report.inconclusive == 0 ? Verdict::pass : Verdict::inconclusive;
  return report;
}

struct BruteForceResult {
  double min_weight = std::numeric_limits<double>::infinity();
  // Each optimal tree as a sorted list of candidate-edge indices. Capped at
  // 64 trees; `optimal_count` keeps the true number.
  std::vector<std::vector<int>> optimal;
  std::size_t optimal_count = 0;
  std::size_t trees_enumerated = 0;
};

// Exhaustive spanning-tree enumeration by edge inclusion/exclusion with
// connectivity pruning. Intended as an oracle for small instances only.
inline BruteForceResult brute_force_mst(int node_count, std::span<const NodePair> edges,
                                        std::span<const double> weights) {
  if (node_count > 9)
    throw TooLarge("brute-force enumeration is limited to 9 nodes, got " +
                   std::to_string(node_count));
  if (edges.size() != weights.size()) throw SizeMismatch("edge and weight counts differ");
  for (const NodePair& e : edges)
    if (e.u < 0 || e.v >= node_count) throw UnknownNode("edge endpoint out of range");

  BruteForceResult result;
  const std::size_t need = static_cast<std::size_t>(node_count) - 1;
  std::vector<int> chosen;
  std::size_t guard = 0;

  const auto weight_tol = [](double w) { return 1e-12 * std::max(1.0, std::fabs(w)); };

  const auto record = [&](double total) {
    ++result.trees_enumerated;
    if (result.trees_enumerated > 400000)
      throw TooLarge("spanning-tree enumeration exceeded 400000 trees");
    if (!std::isfinite(result.min_weight) || total < result.min_weight - weight_tol(total)) {
      result.min_weight = total;
      result.optimal.clear();
      result.optimal_count = 0;
    }
    if (std::fabs(total - result.min_weight) <= weight_tol(total)) {
      ++result.optimal_count;
      if (result.optimal.size() < 64) {
        std::vector<int> tree = chosen;
        std::sort(tree.begin(), tree.end());
        result.optimal.push_back(std::move(tree));
      }
    }
  };

  const auto connectable = [&](const detail::UnionFind& uf, std::size_t from) {
    detail::UnionFind probe = uf;
    for (std::size_t i = from; i < edges.size(); ++i) probe.unite(edges[i].u, edges[i].v);
    const int root = probe.find(0);
    for (int a = 1; a < node_count; ++a)
      if (probe.find(a) != root) return false;
    return true;
  };

  const auto recurse = [&](auto&& self, std::size_t idx, const detail::UnionFind& uf,
                           double total) -> void {
    if (++guard > 20000000) throw TooLarge("brute-force search space too large");
    if (chosen.size() == need) {
      record(total);
      return;
    }
    if (idx >= edges.size()) return;
    if (chosen.size() + (edges.size() - idx) < need) return;
    if (!connectable(uf, idx)) return;
    detail::UnionFind with = uf;
    if (with.unite(edges[idx].u, edges[idx].v)) {
      chosen.push_back(static_cast<int>(idx));
      self(self, idx + 1, with, total + weights[idx]);
      chosen.pop_back();
    }
    self(self, idx + 1, uf, total);
  };

  detail::UnionFind uf(static_cast<std::size_t>(node_count));
  recurse(recurse, 0, uf, 0.0);
  if (result.optimal.empty())
    throw DisconnectedCandidates("no spanning tree exists over the given edges");
  return result;
}

struct PqdReport {
  Verdict verdict = Verdict::pass;
  std::size_t grid = 9;
  std::size_t cells = 0;
  std::size_t violations = 0;
  // Smallest value of P(X<=a, X+Y<=b) - P(X<=a) P(X+Y<=b) over the grid;
  // negative beyond the binomial slack counts as a violation.
  double worst_margin = 0.0;
};

// Empirical positive-quadrant-dependence check of X against X+Y on a
// quantile grid, with slack of 3 binomial standard errors per cell.
inline PqdReport pqd_empirical_check(std::span<const double> x, std::span<const double> y,
                                     std::size_t grid = 9) {
  if (x.size() != y.size()) throw SizeMismatch("sample vectors differ in length");
  const std::size_t m = x.size();
  if (m < 10000) throw InsufficientSamples("pqd check needs m >= 10000 samples");
  if (grid < 1) throw InvalidSpec("grid must have at least one quantile");

  std::vector<double> sum(m);
  for (std::size_t i = 0; i < m; ++i) sum[i] = x[i] + y[i];
  std::vector<double> xs(x.begin(), x.end()), ss(sum.begin(), sum.end());
  std::sort(xs.begin(), xs.end());
  std::sort(ss.begin(), ss.end());
  std::vector<double> ax(grid), bs(grid);
  for (std::size_t q = 0; q < grid; ++q) {
    const std::size_t rank =
        std::min(m - 1, static_cast<std::size_t>((q + 1) * m / (grid + 1)));
    ax[q] = xs[rank];
    bs[q] = ss[rank];
  }

  // 2D histogram over threshold buckets, then prefix sums give the joint
  // cumulative counts for every grid cell.
  Mat<std::int64_t> hist(grid + 1, grid + 1, 0);
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t qx = static_cast<std::size_t>(
        std::lower_bound(ax.begin(), ax.end(), x[i]) - ax.begin());
    const std::size_t qs = static_cast<std::size_t>(
        std::lower_bound(bs.begin(), bs.end(), sum[i]) - bs.begin());
    ++hist(qx, qs);
  }
  Mat<std::int64_t> joint(grid, grid, 0);
  for (std::size_t qa = 0; qa < grid; ++qa) {
    for (std::size_t qb = 0; qb < grid; ++qb) {
      std::int64_t count = hist(qa, qb);
      if (qa > 0) count += joint(qa - 1, qb);
      if (qb > 0) count += joint(qa, qb - 1);
      if (qa > 0 && qb > 0) count -= joint(qa - 1, qb - 1);
      joint(qa, qb) = count;
    }
  }

  PqdReport report;
  report.grid = grid;
  report.cells = grid * grid;
  report.worst_margin = std::numeric_limits<double>::infinity();
  const double dm = static_cast<double>(m);
  for (std::size_t qa = 0; qa < grid; ++qa) {
    const double px = static_cast<double>(std::upper_bound(xs.begin(), xs.end(), ax[qa]) -
                                          xs.begin()) /
                      dm;
    for (std::size_t qb = 0; qb < grid; ++qb) {
      const double ps = static_cast<double>(std::upper_bound(ss.begin(), ss.end(), bs[qb]) -
                                            ss.begin()) /
                        dm;
      const double pj = static_cast<double>(joint(qa, qb)) / dm;
      const double d = pj - px * ps;
      report.worst_margin = std::min(report.worst_margin, d);
      const double eps = 3.0 * std::sqrt(std::max(px * ps * (1.0 - px * ps), 1e-12) / dm);
      if (d < -eps) ++report.violations;
    }
  }
  report.verdict = report.violations == 0 ? Verdict::pass : Verdict::fail;
  return report;
}

struct CorrelationReport {
  double correlation = 0.0;
  double zscore = 0.0;  // Fisher transform, positive means positive dependence
  Verdict verdict = Verdict::inconclusive;
  std::size_t sample_count = 0;
};

// Monte-Carlo check that g_i(sum of injections over V1) and g_j(sum over V2)
// are positively correlated. V1 and V2 are node sets; for the supporting
// theory V1 must be contained in V2, but the check itself accepts any pair
// (disjoint sets serve as a negative control).
inline CorrelationReport positive_correlation_check(const InjectionModel& model,
                                                    const FlowFunctionSpec& gi,
                                                    const FlowFunctionSpec& gj,
                                                    std::span<const NodeId> v1,
                                                    std::span<const NodeId> v2, std::size_t m,
                                                    std::uint64_t seed) {
  if (v1.empty() || v2.empty()) throw InvalidSpec("node sets must be nonempty");
  if (m < 8) throw InsufficientSamples("correlation check needs m >= 8");
  const std::size_t commodities = model.commodities();
  if (gi.commodities() != commodities || gj.commodities() != commodities)
    throw DimensionMismatch("flow functions must match the model's commodity count");
  for (const NodeId a : v1)
    if (a < 0 || a >= model.node_count() || a == model.reference())
      throw UnknownNode("node " + std::to_string(a) + " has no injection");
  for (const NodeId a : v2)
    if (a < 0 || a >= model.node_count() || a == model.reference())
      throw UnknownNode("node " + std::to_string(a) + " has no injection");

  std::vector<double> f1(commodities), f2(commodities);
  double shift_x = 0.0, shift_y = 0.0;
  double sx = 0.0, sy = 0.0, sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t s = 0; s < m; ++s) {
    std::fill(f1.begin(), f1.end(), 0.0);
    std::fill(f2.begin(), f2.end(), 0.0);
    for (std::size_t k = 0; k < commodities; ++k) {
      for (const NodeId a : v1) f1[k] += injection_draw(model, seed, s, a, k);
      for (const NodeId a : v2) f2[k] += injection_draw(model, seed, s, a, k);
    }
    double xv = eval_g(gi, f1);
    double yv = eval_g(gj, f2);
    if (s == 0) {
      shift_x = xv;
      shift_y = yv;
    }
    xv -= shift_x;
    yv -= shift_y;
    sx += xv;
    sy += yv;
    sxx += xv * xv;
    syy += yv * yv;
    sxy += xv * yv;
  }
  const double dm = static_cast<double>(m);
  const double cov = sxy / dm - (sx / dm) * (sy / dm);
  const double vx = std::max(0.0, sxx / dm - (sx / dm) * (sx / dm));
  const double vy = std::max(0.0, syy / dm - (sy / dm) * (sy / dm));
  CorrelationReport report;
  report.sample_count = m;
  if (vx > 0.0 && vy > 0.0) {
    report.correlation = cov / std::sqrt(vx * vy);
    const double clamped = std::clamp(report.correlation, -1.0 + 1e-15, 1.0 - 1e-15);
    report.zscore = std::atanh(clamped) * std::sqrt(dm - 3.0);
    if (report.zscore > 3.0)
      report.verdict = Verdict::pass;
    else if (report.zscore < -3.0)
      report.verdict = Verdict::fail;
    else
      report.verdict = Verdict::inconclusive;
  }
  return report;
}

}  // namespace radnet
