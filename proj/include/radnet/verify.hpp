#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "radnet/generate.hpp"
#include "radnet/io.hpp"
#include "radnet/oracles.hpp"
#include "radnet/rng.hpp"

namespace radnet {

struct CheckResult {
  std::string name;
  Verdict verdict = Verdict::pass;
  std::string detail;
};

// Numerical verification battery for the supporting theory: exact vs
// Monte-Carlo phi, the variance ordering along paths, tree recovery from
// oracle weights, Kruskal against exhaustive enumeration, the PQD
// inequality, and positive correlation of nested flow sums. Verdicts are
// tri-state; statistical checks use 3-sigma slack throughout.
inline std::vector<CheckResult> run_verification_suite(std::uint64_t seed) {
  std::vector<CheckResult> results;

  const auto radial = [&](int n, int fict, FamilyChoice family, std::uint64_t s) {
    GenSpec gen;
    gen.tmpl = NetworkTemplate::random_radial;
    gen.nodes = n;
    gen.fictitious = fict;
    gen.family = family;
    gen.seed = s;
    return gen_network(gen);
  };

  {  // exact phi vs Monte Carlo on a linear network
    const NetworkGraph graph = radial(8, 0, FamilyChoice::linear, rng::mix(seed, 1));
    const RadialTree tree = validate_radial(graph);
    const InjectionModel model = InjectionModel::uniform_defaults(graph, rng::mix(seed, 2));
    const PhiTable exact = exact_phi_linear(graph, tree, model);
    const PhiTable mc = monte_carlo_phi(graph, tree, model, 200000, rng::mix(seed, 3));
    std::size_t off = 0;
    double worst = 0.0;
    for (int a = 0; a < graph.node_count(); ++a) {
      for (int b = a + 1; b < graph.node_count(); ++b) {
        const std::size_t ua = static_cast<std::size_t>(a), ub = static_cast<std::size_t>(b);
        const double dev = std::fabs(exact.phi(ua, ub) - mc.phi(ua, ub));
        const double limit = 3.0 * mc.se(ua, ub);
        worst = std::max(worst, limit > 0 ? dev / limit : 0.0);
        if (dev > limit) ++off;
      }
    }
    results.push_back({"phi-exact-vs-monte-carlo", off == 0 ? Verdict::pass : Verdict::fail,
                       std::to_string(off) + " pairs beyond 3 sigma (worst ratio " +
                           io::format_double(worst) + ")"});
  }

  {  // ordering on exact tables
    std::size_t violations = 0, triples = 0;
    for (int i = 0; i < 20; ++i) {
      const NetworkGraph graph =
          radial(4 + static_cast<int>(rng::uniform_index(rng::mix(seed, 10, i), 9)), 0,
                 FamilyChoice::linear, rng::mix(seed, 11, i));
      const RadialTree tree = validate_radial(graph);
      const InjectionModel model = InjectionModel::uniform_defaults(graph, rng::mix(seed, 12, i));
      const OrderingReport report = check_ordering(tree, exact_phi_linear(graph, tree, model));
      violations += report.violations.size();
      triples += report.triples;
    }
    results.push_back({"ordering-exact", violations == 0 ? Verdict::pass : Verdict::fail,
                       std::to_string(triples) + " triples, " + std::to_string(violations) +
                           " violations"});
  }

  {  // ordering on a Monte-Carlo table for a nonlinear network
    const NetworkGraph graph = radial(10, 0, FamilyChoice::mixed, rng::mix(seed, 20));
    const RadialTree tree = validate_radial(graph);
    const InjectionModel model = InjectionModel::uniform_defaults(graph, rng::mix(seed, 21));
    const OrderingReport report =
        check_ordering(tree, monte_carlo_phi(graph, tree, model, 200000, rng::mix(seed, 22)));
    results.push_back({"ordering-monte-carlo", report.verdict,
                       std::to_string(report.triples) + " triples, " +
                           std::to_string(report.violations.size()) + " violations, " +
                           std::to_string(report.inconclusive) + " inconclusive"});
  }

  {  // operational edges == MST over exact phi
    std::size_t mismatches = 0;
    for (int i = 0; i < 20; ++i) {
      const int n = 5 + static_cast<int>(rng::uniform_index(rng::mix(seed, 30, i), 10));
      const NetworkGraph graph = radial(n, n, FamilyChoice::linear, rng::mix(seed, 31, i));
      const RadialTree tree = validate_radial(graph);
      const InjectionModel model = InjectionModel::uniform_defaults(graph, rng::mix(seed, 32, i));
      const PhiTable phi = exact_phi_linear(graph, tree, model);
      EdgeWeightMap weights;
      weights.sample_count = 0;
      for (const CandidateEdge& e : graph.edges()) {
        weights.edges.push_back(NodePair(e.u, e.v));
        weights.phi.push_back(phi.phi(static_cast<std::size_t>(e.u), static_cast<std::size_t>(e.v)));
      }
      const LearnedTopology learned = kruskal_mst(graph.node_count(), weights);
      for (const CandidateEdge& e : graph.edges())
        if (e.operational != learned.contains(e.u, e.v)) {
          ++mismatches;
          break;
        }
    }
    results.push_back({"mst-recovery-exact-phi", mismatches == 0 ? Verdict::pass : Verdict::fail,
                       std::to_string(mismatches) + " of 20 networks mismatched"});
  }

  {  // Kruskal total weight vs exhaustive enumeration
    std::size_t mismatches = 0;
    for (int i = 0; i < 50; ++i) {
      const int n = 4 + static_cast<int>(rng::uniform_index(rng::mix(seed, 40, i), 5));
      EdgeWeightMap weights;
      weights.sample_count = 0;
      for (NodeId a = 1; a < n; ++a) {
        const NodeId parent = static_cast<NodeId>(
            rng::uniform_index(rng::mix(seed, 41, i, a), static_cast<std::uint64_t>(a)));
        weights.edges.push_back(NodePair(parent, a));
      }
      for (NodeId a = 0; a < n; ++a)
        for (NodeId b = a + 1; b < n; ++b) {
          const NodePair pair(a, b);
          bool present = false;
          for (const NodePair& e : weights.edges) present |= e == pair;
          if (!present && rng::u01(rng::mix(seed, 42, i, a, b)) < 0.4)
            weights.edges.push_back(pair);
        }
      for (std::size_t e = 0; e < weights.edges.size(); ++e)
        weights.phi.push_back(rng::uniform(rng::mix(seed, 43, i, e), 0.0, 1.0));
      const LearnedTopology learned = kruskal_mst(n, weights);
      const BruteForceResult brute = brute_force_mst(n, weights.edges, weights.phi);
      if (std::fabs(learned.total_weight - brute.min_weight) >
          1e-9 * std::max(1.0, std::fabs(brute.min_weight)))
        ++mismatches;
    }
    results.push_back({"kruskal-vs-brute-force", mismatches == 0 ? Verdict::pass : Verdict::fail,
                       std::to_string(mismatches) + " of 50 instances mismatched"});
  }

  {  // PQD of X and X+Y for independent draws, plus a negative control
    const std::size_t m = 100000;
    std::vector<double> x(m), y(m);
    std::size_t failed = 0;
    for (int pair = 0; pair < 3; ++pair) {
      for (std::size_t s = 0; s < m; ++s) {
        const std::uint64_t kx = rng::mix(seed, 50, pair, s);
        const std::uint64_t ky = rng::mix(seed, 51, pair, s);
        x[s] = pair == 0 ? rng::gaussian(kx) : pair == 1 ? rng::uniform(kx, -1, 1)
                                                         : rng::exponential(kx, 1.0);
        y[s] = pair == 0 ? rng::exponential(ky, 0.5) : rng::gaussian(ky);
      }
      if (pqd_empirical_check(x, y).verdict != Verdict::pass) ++failed;
    }
    for (std::size_t s = 0; s < m; ++s) {
      x[s] = rng::gaussian(rng::mix(seed, 52, s));
      y[s] = -2.0 * x[s] + 0.1 * rng::gaussian(rng::mix(seed, 53, s));
    }
    const bool control_flagged = pqd_empirical_check(x, y).verdict == Verdict::fail;
    results.push_back({"pqd-inequality",
                       failed == 0 && control_flagged ? Verdict::pass : Verdict::fail,
                       std::to_string(failed) + " independent pairs failed; negative control " +
                           (control_flagged ? "flagged" : "missed")});
  }

  {  // positive correlation of monotone functions over nested injection sums
    const NetworkGraph graph = radial(10, 0, FamilyChoice::quadratic, rng::mix(seed, 60));
    const InjectionModel model = InjectionModel::uniform_defaults(graph, rng::mix(seed, 61));
    std::size_t passes = 0;
    const int instances = 10;
    for (int i = 0; i < instances; ++i) {
      std::vector<NodeId> v2;
      for (NodeId a = 0; a < graph.node_count(); ++a)
        if (a != graph.reference() && rng::u01(rng::mix(seed, 62, i, a)) < 0.7) v2.push_back(a);
      if (v2.empty()) v2.push_back(graph.reference() == 1 ? 2 : 1);
      std::vector<NodeId> v1;
      for (NodeId a : v2)
        if (rng::u01(rng::mix(seed, 63, i, a)) < 0.5) v1.push_back(a);
      if (v1.empty()) v1.push_back(v2.front());
      const FlowFunctionSpec gi =
          FlowFunctionSpec::quadratic(rng::uniform(rng::mix(seed, 64, i), 0.5, 1.5));
      const FlowFunctionSpec gj =
          FlowFunctionSpec::quadratic(rng::uniform(rng::mix(seed, 65, i), 0.5, 1.5));
      if (positive_correlation_check(model, gi, gj, v1, v2, 50000, rng::mix(seed, 66, i))
              .verdict == Verdict::pass)
        ++passes;
    }
    results.push_back({"nested-sum-positive-correlation",
                       passes == instances ? Verdict::pass : Verdict::fail,
                       std::to_string(passes) + " of " + std::to_string(instances) +
                           " instances significant at 3 sigma"});
  }

  return results;
}

inline nlohmann::json verification_to_json(const std::vector<CheckResult>& results) {
  nlohmann::json checks = nlohmann::json::array();
  for (const CheckResult& r : results)
    checks.push_back({{"name", r.name}, {"verdict", to_string(r.verdict)}, {"detail", r.detail}});
  bool any_fail = false;
  for (const CheckResult& r : results) any_fail |= r.verdict == Verdict::fail;
  return nlohmann::json{{"checks", checks}, {"failed", any_fail}};
}

}  // namespace radnet
