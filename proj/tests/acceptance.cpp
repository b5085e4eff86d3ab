// Acceptance suite. Each criterion prints exactly one [PASS]/[FAIL] line;
// the process exits nonzero if any criterion fails. Statistical criteria are
// fully seeded, so a green run is reproducible.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "radnet/radnet.hpp"

using namespace radnet;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

NetworkGraph power_analog() {
  GenSpec gen;
  gen.tmpl = NetworkTemplate::random_radial;
  gen.nodes = 30;
  gen.fictitious = 30;
  gen.family = FamilyChoice::linear;
  gen.commodities = 2;
  gen.seed = 301;
  return gen_network(gen);
}

NetworkGraph gas_analog() {
  GenSpec gen;
  gen.tmpl = NetworkTemplate::random_radial;
  gen.nodes = 25;
  gen.fictitious = 25;
  gen.family = FamilyChoice::quadratic;
  gen.seed = 304;
  return gen_network(gen);
}

std::vector<NodePair> candidate_pairs(const NetworkGraph& graph) {
  std::vector<NodePair> pairs;
  for (const CandidateEdge& e : graph.edges()) pairs.push_back(NodePair(e.u, e.v));
  return pairs;
}

bool matches_operational(const LearnedTopology& learned, const NetworkGraph& graph) {
  std::size_t operational = 0;
  for (const CandidateEdge& e : graph.edges()) {
    if (!e.operational) continue;
    ++operational;
    if (!learned.contains(e.u, e.v)) return false;
  }
  return learned.edges.size() == operational;
}

// ---- criteria 1 and 2 share per-network oracle tables ----------------------

struct NetworkOutcome {
  bool recovered = false;
  bool used_monte_carlo = false;
  int attempts = 0;
  std::size_t triples = 0;
  std::size_t ordering_violations = 0;
  std::size_t ordering_inconclusive = 0;
};

struct RecoverySummary {
  std::vector<NetworkOutcome> networks;
  double elapsed_seconds = 0.0;
  bool ran = false;
};

RecoverySummary& recovery_summary() {
  static RecoverySummary summary;
  if (summary.ran) return summary;
  const auto start = std::chrono::steady_clock::now();
  const int count = 100;
  summary.networks.resize(count);
  parallel_for(static_cast<std::size_t>(count), [&](std::size_t i) {
    NetworkOutcome& out = summary.networks[i];
    GenSpec gen;
    gen.tmpl = NetworkTemplate::random_radial;
    gen.nodes = 5 + static_cast<int>(i % 11);  // 5..15 (n fictitious edges need n >= 5)
    gen.fictitious = gen.nodes;
    gen.family = i % 3 == 0 ? FamilyChoice::linear : FamilyChoice::mixed;
    gen.seed = rng::mix(9000, i);
    const NetworkGraph graph = gen_network(gen);
    const RadialTree tree = validate_radial(graph);
    const InjectionModel model = InjectionModel::uniform_defaults(graph, rng::mix(9001, i));

    bool all_linear = true;
    for (const TreeEdgeRef& e : tree.edges())
      all_linear &= graph.edges()[static_cast<std::size_t>(e.graph_edge)].flow.family ==
                    FlowFamily::linear_multi;
    out.used_monte_carlo = !all_linear;

    PhiTable table;
    // A Monte-Carlo mismatch means the margin was inside sampling noise;
    // re-running with a fresh seed is allowed, persistent mismatch fails.
    for (out.attempts = 1; out.attempts <= 3; ++out.attempts) {
      table = all_linear
                  ? exact_phi_linear(graph, tree, model)
                  : monte_carlo_phi(graph, tree, model, 1000000,
                                    rng::mix(9002, i, static_cast<std::uint64_t>(out.attempts)));
      EdgeWeightMap weights;
      for (const CandidateEdge& e : graph.edges()) {
        weights.edges.push_back(NodePair(e.u, e.v));
        weights.phi.push_back(
            table.phi(static_cast<std::size_t>(e.u), static_cast<std::size_t>(e.v)));
      }
      out.recovered = matches_operational(kruskal_mst(graph.node_count(), weights), graph);
      if (out.recovered || all_linear) break;
    }

    const OrderingReport ordering = check_ordering(tree, table);
    out.triples = ordering.triples;
    out.ordering_violations = ordering.violations.size();
    out.ordering_inconclusive = ordering.inconclusive;
  });
  summary.elapsed_seconds = seconds_since(start);
  summary.ran = true;
  return summary;
}

Outcome criterion1_exact_weight_recovery() {
  const RecoverySummary& summary = recovery_summary();
  int recovered = 0, mc = 0, reruns = 0;
  for (const NetworkOutcome& n : summary.networks) {
    recovered += n.recovered ? 1 : 0;
    mc += n.used_monte_carlo ? 1 : 0;
    reruns += n.attempts - 1;
  }
  const bool in_time = summary.elapsed_seconds < 120.0;
  Outcome out;
  out.pass = recovered == 100 && in_time;
  out.detail = std::to_string(recovered) + "/100 recovered (" + std::to_string(100 - mc) +
               " exact, " + std::to_string(mc) + " monte-carlo, " + std::to_string(reruns) +
               " re-runs); elapsed " + fmt(summary.elapsed_seconds) + "s (limit 120s)";
  return out;
}

Outcome criterion2_ordering() {
  const RecoverySummary& summary = recovery_summary();
  std::size_t triples = 0, violations = 0, inconclusive = 0;
  for (const NetworkOutcome& n : summary.networks) {
    triples += n.triples;
    violations += n.ordering_violations;
    inconclusive += n.ordering_inconclusive;
  }
  Outcome out;
  out.pass = violations == 0;
  out.detail = std::to_string(triples) + " ordered triples, " + std::to_string(violations) +
               " violations beyond 3 sigma (" + std::to_string(inconclusive) + " inconclusive)";
  return out;
}

// ---- criteria 3 and 4: desk-scale reruns of the sample sweeps --------------

struct TrialGrid {
  // errors[mi][ri] = per-trial fractional errors
  std::vector<std::vector<std::vector<double>>> errors;
};

TrialGrid run_grid(const NetworkGraph& graph, const std::vector<std::size_t>& samples,
                   const std::vector<double>& noise_fracs, int trials, std::uint64_t seed) {
  const RadialTree tree = validate_radial(graph);
  const InjectionModel model =
      InjectionModel::uniform_defaults(graph, rng::mix(seed, stream::model));
  const std::vector<NodePair> candidates = candidate_pairs(graph);
  TrialGrid grid;
  grid.errors.assign(samples.size(),
                     std::vector<std::vector<double>>(noise_fracs.size(),
                                                      std::vector<double>(trials, 0.0)));
  const std::size_t total =
      samples.size() * noise_fracs.size() * static_cast<std::size_t>(trials);
  parallel_for(total, [&](std::size_t flat) {
    const std::size_t t = flat % static_cast<std::size_t>(trials);
    const std::size_t cell = flat / static_cast<std::size_t>(trials);
    const std::size_t mi = cell / noise_fracs.size();
    const std::size_t ri = cell % noise_fracs.size();
    const std::uint64_t trial_seed = rng::mix(seed, stream::trial, mi, ri, t);
    MeasurementSet ms = simulate(graph, tree, model, samples[mi], rng::mix(trial_seed, 1));
    if (noise_fracs[ri] > 0.0)
      ms = add_noise(ms, NoiseSpec{noise_fracs[ri], rng::mix(trial_seed, 2)}, graph.reference());
    grid.errors[mi][ri][t] = eval_topology(learn_structure(ms, candidates), graph);
  });
  return grid;
}

double mean_of(const std::vector<double>& xs) {
  double total = 0.0;
  for (double x : xs) total += x;
  return total / static_cast<double>(xs.size());
}

double stddev_of(const std::vector<double>& xs) {
  const double mean = mean_of(xs);
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return xs.size() > 1 ? std::sqrt(ss / static_cast<double>(xs.size() - 1)) : 0.0;
}

Outcome criterion3_noise_free_recovery() {
  const auto start = std::chrono::steady_clock::now();
  Outcome out;
  out.pass = true;
  const int trials = 50;
  const struct {
    const char* name;
    NetworkGraph graph;
    std::uint64_t seed;
  } cases[] = {{"power", power_analog(), 77}, {"gas", gas_analog(), 78}};
  for (const auto& c : cases) {
    const TrialGrid grid = run_grid(c.graph, {200, 400}, {0.0}, trials, c.seed);
    const double mean200 = mean_of(grid.errors[0][0]);
    int zero400 = 0;
    for (double e : grid.errors[1][0]) zero400 += e == 0.0 ? 1 : 0;
    const bool ok = mean200 < 0.02 && zero400 >= 48;  // 95% of 50
    out.pass &= ok;
    out.detail += std::string(c.name) + ": mean(m=200)=" + fmt(mean200) + ", zero(m=400)=" +
                  std::to_string(zero400) + "/50; ";
  }
  const double elapsed = seconds_since(start);
  out.pass &= elapsed < 60.0;
  out.detail += "elapsed " + fmt(elapsed) + "s (limit 60s)";
  return out;
}

Outcome criterion4_noisy_trend() {
  Outcome out;
  out.pass = true;
  const int trials = 50;
  const std::vector<std::size_t> samples = {100, 400, 1600};
  const std::vector<double> noise = {0.05, 0.08, 0.1};
  const struct {
    const char* name;
    NetworkGraph graph;
    std::uint64_t seed;
  } cases[] = {{"power", power_analog(), 77}, {"gas", gas_analog(), 78}};
  for (const auto& c : cases) {
    const TrialGrid grid = run_grid(c.graph, samples, noise, trials, c.seed);
    for (std::size_t ri = 0; ri < noise.size(); ++ri) {
      const double at100 = mean_of(grid.errors[0][ri]);
      const double at1600 = mean_of(grid.errors[2][ri]);
      if (!(at1600 < at100)) {
        out.pass = false;
        out.detail += std::string(c.name) + " rho=" + fmt(noise[ri]) +
                      ": mean(m=1600)=" + fmt(at1600) + " !< mean(m=100)=" + fmt(at100) + "; ";
      }
    }
    for (std::size_t ri = 1; ri < noise.size(); ++ri) {
      const double lo = mean_of(grid.errors[1][ri - 1]);
      const double hi = mean_of(grid.errors[1][ri]);
      const double pooled =
          std::sqrt((stddev_of(grid.errors[1][ri - 1]) * stddev_of(grid.errors[1][ri - 1]) +
                     stddev_of(grid.errors[1][ri]) * stddev_of(grid.errors[1][ri])) /
                    static_cast<double>(trials));
      if (hi < lo - pooled) {
        out.pass = false;
        out.detail += std::string(c.name) + " m=400: mean(rho=" + fmt(noise[ri]) + ")=" +
                      fmt(hi) + " < mean(rho=" + fmt(noise[ri - 1]) + ")=" + fmt(lo) +
                      " beyond 1 pooled se; ";
      }
    }
  }
  if (out.pass)
    out.detail =
        "errors fall from m=100 to m=1600 at every rho and rise with rho at m=400 "
        "(both analogs)";
  return out;
}

Outcome criterion5_kruskal_brute_force() {
  int matched = 0;
  const int instances = 200;
  for (int i = 0; i < instances; ++i) {
    const int n = 4 + static_cast<int>(rng::uniform_index(rng::mix(9100, i), 5));  // 4..8
    EdgeWeightMap weights;
    for (NodeId a = 1; a < n; ++a)
      weights.edges.push_back(
          NodePair(static_cast<NodeId>(
                       rng::uniform_index(rng::mix(9101, i, a), static_cast<std::uint64_t>(a))),
                   a));
    for (NodeId a = 0; a < n; ++a)
      for (NodeId b = a + 1; b < n; ++b) {
        const NodePair pair(a, b);
        if (std::find(weights.edges.begin(), weights.edges.end(), pair) ==
                weights.edges.end() &&
            rng::u01(rng::mix(9102, i, a, b)) < 0.5)
          weights.edges.push_back(pair);
      }
    for (std::size_t e = 0; e < weights.edges.size(); ++e)
      weights.phi.push_back(rng::uniform(rng::mix(9103, i, e), 0.0, 1.0));

    const LearnedTopology learned = kruskal_mst(n, weights);
    const BruteForceResult brute = brute_force_mst(n, weights.edges, weights.phi);
    std::vector<int> picked;
    for (std::size_t e = 0; e < weights.edges.size(); ++e)
      if (learned.contains(weights.edges[e].u, weights.edges[e].v))
        picked.push_back(static_cast<int>(e));
    std::sort(picked.begin(), picked.end());
    bool among = false;
    for (const auto& tree : brute.optimal) among |= tree == picked;
    const bool weight_ok = std::fabs(learned.total_weight - brute.min_weight) <=
                           1e-9 * std::max(1.0, std::fabs(brute.min_weight));
    matched += (weight_ok && among) ? 1 : 0;
  }
  Outcome out;
  out.pass = matched == instances;
  out.detail = std::to_string(matched) + "/" + std::to_string(instances) +
               " random graphs match the exhaustive optimum";
  return out;
}

Outcome criterion6_pqd() {
  const std::size_t m = 100000;
  const auto draw = [](int kind, std::uint64_t key) {
    switch (kind) {
      case 0: return rng::gaussian(key);
      case 1: return rng::uniform(key, -1.0, 1.0);
      case 2: return rng::exponential(key, 1.0);
      case 3: return 2.0 + 0.5 * rng::gaussian(key);
      default: return rng::exponential(key, 0.5);
    }
  };
  // Ten (X, Y) mixes over Gaussian, uniform, exponential, and scaled variants.
  const int pairs[10][2] = {{0, 0}, {0, 1}, {0, 2}, {1, 0}, {1, 1},
                            {1, 2}, {2, 0}, {2, 1}, {2, 4}, {3, 2}};
  int passed = 0;
  std::vector<double> x(m), y(m);
  for (int p = 0; p < 10; ++p) {
    for (std::size_t s = 0; s < m; ++s) {
      x[s] = draw(pairs[p][0], rng::mix(9200, p, s));
      y[s] = draw(pairs[p][1], rng::mix(9201, p, s));
    }
    passed += pqd_empirical_check(x, y).verdict == Verdict::pass ? 1 : 0;
  }
  for (std::size_t s = 0; s < m; ++s) {
    x[s] = rng::gaussian(rng::mix(9202, s));
    y[s] = -2.0 * x[s] + 0.1 * rng::gaussian(rng::mix(9203, s));
  }
  const bool control = pqd_empirical_check(x, y).verdict == Verdict::fail;
  Outcome out;
  out.pass = passed == 10 && control;
  out.detail = std::to_string(passed) + "/10 distribution pairs clean; negative control " +
               (control ? "flagged" : "missed");
  return out;
}

Outcome criterion7_positive_correlation() {
  int significant = 0;
  const int instances = 50;
  for (int i = 0; i < instances; ++i) {
    GenSpec gen;
    gen.tmpl = NetworkTemplate::random_radial;
    gen.nodes = 10;
    gen.family = FamilyChoice::quadratic;
    gen.seed = rng::mix(9300, i / 5);
    const NetworkGraph graph = gen_network(gen);
    const InjectionModel model = InjectionModel::uniform_defaults(graph, rng::mix(9301, i / 5));
    std::vector<NodeId> v2;
    for (NodeId a = 0; a < graph.node_count(); ++a)
      if (a != graph.reference() && rng::u01(rng::mix(9302, i, a)) < 0.7) v2.push_back(a);
    if (v2.empty()) v2.push_back(graph.reference() == 1 ? 2 : 1);
    std::vector<NodeId> v1;
    for (NodeId a : v2)
      if (rng::u01(rng::mix(9303, i, a)) < 0.5) v1.push_back(a);
    if (v1.empty()) v1.push_back(v2.front());
    const FlowFunctionSpec gi =
        FlowFunctionSpec::quadratic(rng::uniform(rng::mix(9304, i), 0.5, 1.5),
                                    rng::uniform(rng::mix(9305, i), -0.2, 0.2));
    const FlowFunctionSpec gj =
        FlowFunctionSpec::quadratic(rng::uniform(rng::mix(9306, i), 0.5, 1.5));
    const CorrelationReport report =
        positive_correlation_check(model, gi, gj, v1, v2, 50000, rng::mix(9307, i));
    significant += report.verdict == Verdict::pass ? 1 : 0;
  }
  Outcome out;
  out.pass = significant == instances;
  out.detail = std::to_string(significant) + "/" + std::to_string(instances) +
               " nested-set instances positive at 3 sigma";
  return out;
}

Outcome criterion8_estimator_round_trip() {
  const NetworkGraph graph = gas_analog();
  const RadialTree tree = validate_radial(graph);
  const InjectionModel model = InjectionModel::uniform_defaults(graph, 8801);
  const std::size_t m = 100000;
  const InjectionSamples truth = sample_injections(model, m, 8802);
  const MeasurementSet ms = solve_potentials(graph, tree, solve_flows(tree, truth), 1.0);
  const InjectionSamples recovered = recover_injections(tree, recover_flows(graph, tree, ms));

  double worst = 0.0;
  for (std::size_t s = 0; s < m; ++s)
    for (int a = 0; a < graph.node_count(); ++a)
      worst = std::max(worst, std::fabs(recovered.commodity[0](s, static_cast<std::size_t>(a)) -
                                        truth.commodity[0](s, static_cast<std::size_t>(a))));

  const InjectionEstimate est = injection_statistics(recovered, false);
  double worst_var = 0.0;
  for (int a = 0; a < graph.node_count(); ++a) {
    if (a == graph.reference()) continue;
    const double target = model.moments(a, 0).variance;
    worst_var = std::max(
        worst_var,
        std::fabs(est.nodes[static_cast<std::size_t>(a)].variance[0] - target) / target);
  }
  Outcome out;
  out.pass = worst <= 1e-8 && worst_var < 0.10;
  out.detail = "max per-entry deviation " + fmt(worst) + " (limit 1e-8); worst variance error " +
               fmt(100.0 * worst_var) + "% (limit 10%)";
  return out;
}

Outcome criterion9_complexity() {
  const auto build = [](int fictitious) {
    GenSpec gen;
    gen.tmpl = NetworkTemplate::random_radial;
    gen.nodes = 2000;
    gen.fictitious = fictitious;
    gen.family = FamilyChoice::linear;
    gen.seed = 8901;
    return gen_network(gen);
  };
  const auto learner_seconds = [](const NetworkGraph& graph) {
    const RadialTree tree = validate_radial(graph);
    const InjectionModel model = InjectionModel::uniform_defaults(graph, 8902);
    const MeasurementSet ms = simulate(graph, tree, model, 200, 8903);
    const std::vector<NodePair> candidates = candidate_pairs(graph);
    double best = 1e30;
    for (int rep = 0; rep < 3; ++rep) {
      const auto start = std::chrono::steady_clock::now();
      const LearnedTopology learned = learn_structure(ms, candidates);
      const double t = seconds_since(start);
      if (learned.edges.size() != 1999u) return 1e30;  // sanity
      best = std::min(best, t);
    }
    return best;
  };
  const NetworkGraph base = build(20000 - 1999);
  const NetworkGraph doubled = build(40000 - 1999);
  const double t1 = learner_seconds(base);
  const double t2 = learner_seconds(doubled);
  Outcome out;
  out.pass = t1 < 5.0 && t2 / t1 < 2.6;
  out.detail = "20k edges: " + fmt(t1) + "s (limit 5s); 40k edges: " + fmt(t2) + "s; ratio " +
               fmt(t2 / t1) + " (limit 2.6)";
  return out;
}

Outcome criterion10_determinism() {
  ExperimentConfig config;
  GenSpec gen;
  gen.tmpl = NetworkTemplate::random_radial;
  gen.nodes = 30;
  gen.fictitious = 30;
  gen.family = FamilyChoice::linear;
  gen.commodities = 2;
  gen.seed = 301;
  config.network_template = gen;
  config.samples = {25, 50, 100};
  config.noise_fracs = {0.0, 0.05};
  config.trials = 10;
  config.seed = 424242;

  const fs::path base = fs::temp_directory_path() / "radnet_acceptance_determinism";
  fs::remove_all(base);
  config.out_dir = base / "run1";
  run_sweep_to_dir(config);
  config.out_dir = base / "run2";
  run_sweep_to_dir(config);
  const auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  const std::string run1 = slurp(base / "run1" / "sweep.csv");
  const std::string run2 = slurp(base / "run2" / "sweep.csv");
  fs::remove_all(base);
  Outcome out;
  out.pass = !run1.empty() && run1 == run2;
  out.detail = out.pass ? "two sweeps with the same seed emitted byte-identical CSV (" +
                              std::to_string(run1.size()) + " bytes)"
                        : "sweep CSVs differ between runs";
  return out;
}

}  // namespace

int main() {
  const struct {
    int id;
    const char* name;
    std::function<Outcome()> run;
  } criteria[] = {
      {1, "exact-weight recovery over oracle phi", criterion1_exact_weight_recovery},
      {2, "variance ordering along tree paths", criterion2_ordering},
      {3, "noise-free empirical recovery", criterion3_noise_free_recovery},
      {4, "noisy error trend", criterion4_noisy_trend},
      {5, "kruskal vs exhaustive enumeration", criterion5_kruskal_brute_force},
      {6, "positive quadrant dependence", criterion6_pqd},
      {7, "nested-sum positive correlation", criterion7_positive_correlation},
      {8, "estimator round trip", criterion8_estimator_round_trip},
      {9, "quasi-linear learner complexity", criterion9_complexity},
      {10, "sweep determinism", criterion10_determinism},
  };
  int failures = 0;
  for (const auto& criterion : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = criterion.run();
    } catch (const std::exception& e) {
      outcome.pass = false;
      outcome.detail = std::string("exception: ") + e.what();
    }
    std::printf("[%s] criterion %2d: %s -- %s (%.1fs)\n", outcome.pass ? "PASS" : "FAIL",
                criterion.id, criterion.name, outcome.detail.c_str(), seconds_since(start));
    std::fflush(stdout);
    failures += outcome.pass ? 0 : 1;
  }
  std::printf("%d/10 acceptance criteria passed\n", 10 - failures);
  return failures == 0 ? 0 : 1;
}
