#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "radnet/errors.hpp"
#include "radnet/generate.hpp"
#include "radnet/io.hpp"
#include "radnet/learn.hpp"
#include "radnet/network.hpp"
#include "radnet/parallel.hpp"
#include "radnet/simulate.hpp"

namespace radnet {

// Fraction of operational edges the learned tree gets wrong:
// |learned \ true| / |true|. For two spanning trees over the same nodes this
// equals |true \ learned| / |true|.
inline double eval_topology(const LearnedTopology& learned, const NetworkGraph& truth) {
  std::set<NodePair> true_edges;
  for (const CandidateEdge& e : truth.edges())
    if (e.operational) true_edges.insert(NodePair(e.u, e.v));
  if (true_edges.empty()) throw SizeMismatch("truth network has no operational edges");
  if (learned.edges.size() != true_edges.size())
    throw SizeMismatch("learned tree has " + std::to_string(learned.edges.size()) +
                       " edges, truth has " + std::to_string(true_edges.size()));
  std::size_t missed = 0;
  for (const LearnedEdge& e : learned.edges) {
    if (e.u < 0 || e.v >= truth.node_count())
      throw SizeMismatch("learned edge (" + std::to_string(e.u) + "," + std::to_string(e.v) +
                         ") outside the truth node set");
    if (!true_edges.count(NodePair(e.u, e.v))) ++missed;
  }
  return static_cast<double>(missed) / static_cast<double>(true_edges.size());
}

struct ExperimentConfig {
  std::optional<std::filesystem::path> network_file;
  std::optional<GenSpec> network_template;
  std::vector<std::size_t> samples = {25, 50, 100, 200, 400};
  std::vector<double> noise_fracs = {0.0};
  int trials = 50;
  std::uint64_t seed = 1;
  std::filesystem::path out_dir = ".";
  double ref_potential = 1.0;
  unsigned threads = 0;  // 0 = hardware concurrency
};

inline void validate_config(const ExperimentConfig& config) {
  if (!config.network_file && !config.network_template)
    throw InvalidSpec("config needs a network file or a template");
  if (config.trials < 1) throw InvalidSpec("trials must be >= 1");
  if (config.samples.empty()) throw InvalidSpec("sample grid must be nonempty");
  for (std::size_t m : config.samples)
    if (m < 2) throw InvalidSpec("every sample count must be >= 2");
  for (double rho : config.noise_fracs)
    if (rho < 0.0) throw InvalidSpec("noise fractions must be >= 0");
}

struct ErrorReportRow {
  std::size_t samples = 0;
  double noise_frac = 0.0;
  double mean_err = 0.0;
  double std_err = 0.0;  // sample standard deviation over trials (0 for one trial)
  int trials = 0;
};

struct ErrorReport {
  std::vector<ErrorReportRow> rows;  // sorted by (samples, noise_frac)
};

inline std::string error_report_csv(const ErrorReport& report) {
  std::string text = "m,rho,mean_err,std_err,trials\n";
  for (const ErrorReportRow& row : report.rows) {
    text += std::to_string(row.samples);
    text += ',';
    text += io::format_double(row.noise_frac);
    text += ',';
    text += io::format_double(row.mean_err);
    text += ',';
    text += io::format_double(row.std_err);
    text += ',';
    text += std::to_string(row.trials);
    text += "\n";
  }
  return text;
}

// Per-trial pipeline: fresh injections -> simulate -> noise -> learn -> eval.
// Deterministic for a fixed seed regardless of the thread count; trial seeds
// are derived, never sequential draws from shared state.
inline ErrorReport run_sweep(const ExperimentConfig& config, const NetworkGraph& graph) {
  validate_config(config);
  const RadialTree tree = validate_radial(graph);
  const InjectionModel model =
      InjectionModel::uniform_defaults(graph, rng::mix(config.seed, stream::model));
  std::vector<NodePair> candidates;
  candidates.reserve(graph.edges().size());
  for (const CandidateEdge& e : graph.edges()) candidates.push_back(NodePair(e.u, e.v));

  const std::size_t cells = config.samples.size() * config.noise_fracs.size();
  const std::size_t total = cells * static_cast<std::size_t>(config.trials);
  std::vector<double> errors(total, 0.0);

  parallel_for(
      total,
      [&](std::size_t flat) {
        const std::size_t trial = flat % static_cast<std::size_t>(config.trials);
        const std::size_t cell = flat / static_cast<std::size_t>(config.trials);
        const std::size_t mi = cell / config.noise_fracs.size();
        const std::size_t ri = cell % config.noise_fracs.size();
        const std::size_t m = config.samples[mi];
        const double rho = config.noise_fracs[ri];
        const std::uint64_t trial_seed = rng::mix(config.seed, stream::trial, mi, ri, trial);
        MeasurementSet ms = simulate(graph, tree, model, m, rng::mix(trial_seed, 1),
                                     config.ref_potential);
        if (rho > 0.0)
          ms = add_noise(ms, NoiseSpec{rho, rng::mix(trial_seed, 2)}, graph.reference());
        const LearnedTopology learned = learn_structure(ms, candidates);
        errors[flat] = eval_topology(learned, graph);
      },
      config.threads);

  ErrorReport report;
  for (std::size_t mi = 0; mi < config.samples.size(); ++mi) {
    for (std::size_t ri = 0; ri < config.noise_fracs.size(); ++ri) {
      const std::size_t cell = mi * config.noise_fracs.size() + ri;
      double mean = 0.0;
      for (int t = 0; t < config.trials; ++t)
        mean += errors[cell * static_cast<std::size_t>(config.trials) + static_cast<std::size_t>(t)];
      mean /= static_cast<double>(config.trials);
      double ss = 0.0;
      for (int t = 0; t < config.trials; ++t) {
        const double d =
            errors[cell * static_cast<std::size_t>(config.trials) + static_cast<std::size_t>(t)] -
            mean;
        ss += d * d;
      }
      const double stddev =
          config.trials > 1 ? std::sqrt(ss / static_cast<double>(config.trials - 1)) : 0.0;
      report.rows.push_back({config.samples[mi], config.noise_fracs[ri], mean, stddev,
                             config.trials});
    }
  }
  std::sort(report.rows.begin(), report.rows.end(), [](const auto& a, const auto& b) {
    if (a.samples != b.samples) return a.samples < b.samples;
    return a.noise_frac < b.noise_frac;
  });
  return report;
}

inline NetworkGraph resolve_network(const ExperimentConfig& config) {
  if (config.network_file) return io::load_network(*config.network_file);
  return gen_network(*config.network_template);
}

// Full sweep entry point: resolves the network, runs the grid, writes
// sweep.csv into the output directory, and returns the report.
inline ErrorReport run_sweep_to_dir(const ExperimentConfig& config) {
  const NetworkGraph graph = resolve_network(config);
  const ErrorReport report = run_sweep(config, graph);
  io::write_text_file(config.out_dir / "sweep.csv", error_report_csv(report));
  return report;
}

}  // namespace radnet
