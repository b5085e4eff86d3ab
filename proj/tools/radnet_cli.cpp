// Command-line front end: network generation, simulation, structure
// learning, injection estimation, evaluation, verification, and the
// sample-size/noise sweep. Exit codes: 0 success, 2 validation error,
// 3 pipeline error.

#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "radnet/radnet.hpp"

namespace fs = std::filesystem;
using namespace radnet;

namespace {

fs::path default_out_dir() {
  const char* env = std::getenv("RADNET_OUT_DIR");
  return env && *env ? fs::path(env) : fs::path(".");
}

NetworkTemplate parse_template(const std::string& name) {
  if (name == "chain") return NetworkTemplate::chain;
  if (name == "star") return NetworkTemplate::star;
  if (name == "random-radial") return NetworkTemplate::random_radial;
  throw InvalidSpec("unknown template \"" + name + "\"");
}

FamilyChoice parse_family(const std::string& name) {
  if (name == "linear-multi" || name == "linear") return FamilyChoice::linear;
  if (name == "quadratic-boost" || name == "quadratic") return FamilyChoice::quadratic;
  if (name == "power-law" || name == "power") return FamilyChoice::power;
  if (name == "mixed") return FamilyChoice::mixed;
  throw InvalidSpec("unknown flow family \"" + name + "\"");
}

std::vector<NodePair> candidate_pairs(const NetworkGraph& graph) {
  std::vector<NodePair> pairs;
  pairs.reserve(graph.edges().size());
  for (const CandidateEdge& e : graph.edges()) pairs.push_back(NodePair(e.u, e.v));
  return pairs;
}

ExperimentConfig config_from_json(const nlohmann::json& j) {
  io::detail::reject_unknown_fields(j,
                                    {"network", "template", "samples", "noise_fracs", "trials",
                                     "seed", "out_dir", "ref_potential", "threads"},
                                    "sweep config");
  ExperimentConfig config;
  if (j.contains("network")) config.network_file = fs::path(j.at("network").get<std::string>());
  if (j.contains("template")) {
    const nlohmann::json& jt = j.at("template");
    io::detail::reject_unknown_fields(
        jt, {"kind", "nodes", "fictitious", "family", "commodities", "gamma", "seed"},
        "sweep template");
    GenSpec gen;
    gen.tmpl = parse_template(io::detail::require<std::string>(jt, "kind", "sweep template"));
    gen.nodes = io::detail::require<int>(jt, "nodes", "sweep template");
    if (jt.contains("fictitious")) gen.fictitious = jt.at("fictitious").get<int>();
    if (jt.contains("family")) gen.family = parse_family(jt.at("family").get<std::string>());
    if (jt.contains("commodities")) gen.commodities = jt.at("commodities").get<std::size_t>();
    if (jt.contains("gamma")) gen.gamma = jt.at("gamma").get<double>();
    if (jt.contains("seed")) gen.seed = jt.at("seed").get<std::uint64_t>();
    config.network_template = gen;
  }
  if (j.contains("samples")) config.samples = j.at("samples").get<std::vector<std::size_t>>();
  if (j.contains("noise_fracs"))
    config.noise_fracs = j.at("noise_fracs").get<std::vector<double>>();
  if (j.contains("trials")) config.trials = j.at("trials").get<int>();
  if (j.contains("seed")) config.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("out_dir")) config.out_dir = fs::path(j.at("out_dir").get<std::string>());
  if (j.contains("ref_potential")) config.ref_potential = j.at("ref_potential").get<double>();
  if (j.contains("threads")) config.threads = j.at("threads").get<unsigned>();
  return config;
}

int run(int argc, char** argv) {
  CLI::App app{"radial flow network simulation and topology learning"};
  app.require_subcommand(1);

  // gen-network
  auto* gen_cmd = app.add_subcommand("gen-network", "generate a candidate network file");
  std::string gen_template = "random-radial", gen_family = "linear-multi", gen_out;
  GenSpec gen;
  gen_cmd->add_option("--template", gen_template, "chain | star | random-radial");
  gen_cmd->add_option("--nodes", gen.nodes, "node count")->required();
  gen_cmd->add_option("--fictitious", gen.fictitious, "non-operational candidate edges");
  gen_cmd->add_option("--family", gen_family,
                      "linear-multi | quadratic-boost | power-law | mixed");
  gen_cmd->add_option("--commodities", gen.commodities, "commodity count for linear-multi");
  gen_cmd->add_option("--gamma", gen.gamma, "power-law exponent");
  gen_cmd->add_option("--seed", gen.seed, "generation seed");
  gen_cmd->add_option("--out", gen_out, "output network JSON path");

  // simulate
  auto* sim_cmd = app.add_subcommand("simulate", "simulate nodal potential measurements");
  std::string sim_network, sim_out, sim_model;
  std::size_t sim_samples = 100;
  std::uint64_t sim_seed = 1;
  double sim_noise = 0.0, sim_ref_potential = 1.0;
  std::optional<std::uint64_t> sim_noise_seed;
  std::optional<double> sim_mean, sim_sigma;
  sim_cmd->add_option("--network", sim_network, "network JSON")->required();
  sim_cmd->add_option("--samples", sim_samples, "number of samples")->required();
  sim_cmd->add_option("--seed", sim_seed, "injection seed");
  sim_cmd->add_option("--noise-frac", sim_noise,
                      "noise variance as a fraction of the average potential variance");
  sim_cmd->add_option("--noise-seed", sim_noise_seed, "noise seed (defaults to seed+1 mix)");
  sim_cmd->add_option("--model", sim_model, "injection model JSON (overrides defaults)");
  sim_cmd->add_option("--inj-mean", sim_mean, "constant injection mean for all nodes");
  sim_cmd->add_option("--inj-sigma", sim_sigma, "constant injection stddev for all nodes");
  sim_cmd->add_option("--ref-potential", sim_ref_potential, "reference node potential");
  sim_cmd->add_option("--out", sim_out, "output directory");

  // learn
  auto* learn_cmd = app.add_subcommand("learn", "learn the operational tree from measurements");
  std::string learn_measurements, learn_candidates, learn_out;
  std::optional<double> learn_tau;
  bool learn_group = false, learn_also_complete = false;
  learn_cmd->add_option("--measurements", learn_measurements, "measurement CSV")->required();
  learn_cmd->add_option("--candidates", learn_candidates,
                        "network JSON restricting candidate edges (complete graph otherwise)");
  learn_cmd->add_flag("--group", learn_group,
                      "partition nodes by potential correlation before learning");
  learn_cmd->add_option("--group-threshold", learn_tau,
                        "correlation threshold for --group (default 0.1)");
  learn_cmd->add_flag("--also-complete", learn_also_complete,
                      "also learn over the complete graph and report agreement");
  learn_cmd->add_option("--out", learn_out, "output tree JSON path");

  // estimate
  auto* est_cmd = app.add_subcommand("estimate", "recover injection statistics");
  std::string est_measurements, est_tree, est_network, est_out;
  est_cmd->add_option("--measurements", est_measurements, "measurement CSV")->required();
  est_cmd->add_option("--tree", est_tree, "learned tree JSON")->required();
  est_cmd->add_option("--network", est_network, "network JSON with flow specs")->required();
  est_cmd->add_option("--out", est_out, "output injection JSON path");

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "fractional error of a learned tree");
  std::string eval_learned, eval_truth;
  eval_cmd->add_option("--learned", eval_learned, "learned tree JSON")->required();
  eval_cmd->add_option("--truth", eval_truth, "ground-truth network JSON")->required();

  // verify
  auto* verify_cmd = app.add_subcommand("verify", "run the numerical verification suite");
  std::uint64_t verify_seed = 7;
  std::string verify_out;
  verify_cmd->add_option("--seed", verify_seed, "suite seed");
  verify_cmd->add_option("--out", verify_out, "report JSON path");

  // sweep
  auto* sweep_cmd = app.add_subcommand("sweep", "error-vs-samples experiment grid");
  std::string sweep_config, sweep_network, sweep_out;
  std::vector<std::size_t> sweep_samples;
  std::vector<double> sweep_noise;
  int sweep_trials = 0;
  std::optional<std::uint64_t> sweep_seed;
  sweep_cmd->add_option("--config", sweep_config, "experiment config JSON");
  sweep_cmd->add_option("--network", sweep_network, "network JSON (overrides config)");
  sweep_cmd->add_option("--samples", sweep_samples, "sample counts")->delimiter(',');
  sweep_cmd->add_option("--noise-fracs", sweep_noise, "noise fractions")->delimiter(',');
  sweep_cmd->add_option("--trials", sweep_trials, "trials per grid cell");
  sweep_cmd->add_option("--seed", sweep_seed, "sweep seed");
  sweep_cmd->add_option("--out", sweep_out, "output directory");

  CLI11_PARSE(app, argc, argv);

  if (gen_cmd->parsed()) {
    gen.tmpl = parse_template(gen_template);
    gen.family = parse_family(gen_family);
    const NetworkGraph graph = gen_network(gen);
    const fs::path out =
        gen_out.empty() ? default_out_dir() / "network.json" : fs::path(gen_out);
    io::save_network(graph, out);
    std::printf("wrote %s (%d nodes, %zu edges)\n", out.string().c_str(), graph.node_count(),
                graph.edges().size());
    return 0;
  }

  if (sim_cmd->parsed()) {
    const NetworkGraph graph = io::load_network(sim_network);
    const RadialTree tree = validate_radial(graph);
    InjectionModel model = [&] {
      if (!sim_model.empty()) return io::model_from_json(io::read_json_file(sim_model));
      if (sim_mean || sim_sigma)
        return InjectionModel::constant(graph, sim_mean.value_or(-1.0), sim_sigma.value_or(0.2));
      return InjectionModel::uniform_defaults(graph, rng::mix(sim_seed, stream::model));
    }();
    MeasurementSet ms = simulate(graph, tree, model, sim_samples, sim_seed, sim_ref_potential);
    if (sim_noise > 0.0) {
      const std::uint64_t noise_seed = sim_noise_seed.value_or(rng::mix(sim_seed, stream::noise));
      ms = add_noise(ms, NoiseSpec{sim_noise, noise_seed}, graph.reference());
    }
    const fs::path dir = sim_out.empty() ? default_out_dir() : fs::path(sim_out);
    io::save_measurements(ms, dir / "measurements.csv");
    std::printf("wrote %s (%zu samples x %zu nodes)\n",
                (dir / "measurements.csv").string().c_str(), ms.sample_count(), ms.node_count());
    return 0;
  }

  if (learn_cmd->parsed()) {
    const MeasurementSet ms = io::load_measurements(learn_measurements);
    std::optional<std::vector<NodePair>> candidates;
    if (!learn_candidates.empty()) {
      const NetworkGraph graph = io::load_network(learn_candidates);
      if (static_cast<std::size_t>(graph.node_count()) != ms.node_count())
        throw SizeMismatch("candidate network covers " + std::to_string(graph.node_count()) +
                           " nodes, measurements cover " + std::to_string(ms.node_count()));
      candidates = candidate_pairs(graph);
    }
    LearnedTopology topo =
        learn_group || learn_tau
            ? learn_grouped(ms, learn_tau.value_or(kDefaultGroupThreshold), candidates)
            : learn_structure(ms, candidates);
    nlohmann::json out = io::topology_to_json(topo);
    if (learn_also_complete && candidates) {
      const LearnedTopology complete = learn_structure(ms);
      bool agrees = complete.edges.size() == topo.edges.size();
      if (agrees)
        for (const LearnedEdge& e : complete.edges) agrees &= topo.contains(e.u, e.v);
      out["complete_graph_agrees"] = agrees;
    }
    const fs::path path = learn_out.empty() ? default_out_dir() / "tree.json" : fs::path(learn_out);
    io::write_json_file(path, out);
    std::printf("wrote %s (%zu edges, total weight %s)\n", path.string().c_str(),
                topo.edges.size(), io::format_double(topo.total_weight).c_str());
    return 0;
  }

  if (est_cmd->parsed()) {
    const MeasurementSet ms = io::load_measurements(est_measurements);
    const NetworkGraph graph = io::load_network(est_network);
    const LearnedTopology topo = io::topology_from_json(io::read_json_file(est_tree));
    std::vector<NodePair> edges;
    for (const LearnedEdge& e : topo.edges) edges.push_back(NodePair(e.u, e.v));
    const RadialTree tree = tree_from_edges(graph, edges);
    const FlowSamples flows = recover_flows(graph, tree, ms);
    const InjectionSamples injections = recover_injections(tree, flows);
    const InjectionEstimate est = injection_statistics(injections, ms.meta.noise_frac > 0.0);
    const fs::path path = est_out.empty() ? default_out_dir() / "injections.json" : fs::path(est_out);
    io::write_json_file(path, io::estimate_to_json(est));
    std::printf("wrote %s (%zu nodes, biased=%s)\n", path.string().c_str(), est.nodes.size(),
                est.biased ? "true" : "false");
    return 0;
  }

  if (eval_cmd->parsed()) {
    const LearnedTopology learned = io::topology_from_json(io::read_json_file(eval_learned));
    const NetworkGraph truth = io::load_network(eval_truth);
    std::printf("fractional_error=%s\n", io::format_double(eval_topology(learned, truth)).c_str());
    return 0;
  }

  if (verify_cmd->parsed()) {
    const std::vector<CheckResult> results = run_verification_suite(verify_seed);
    bool failed = false;
    for (const CheckResult& r : results) {
      std::printf("[%-12s] %-36s %s\n", to_string(r.verdict), r.name.c_str(), r.detail.c_str());
      failed |= r.verdict == Verdict::fail;
    }
    if (!verify_out.empty()) io::write_json_file(verify_out, verification_to_json(results));
    if (failed) throw IoError("verification suite reported failures");
    return 0;
  }

  if (sweep_cmd->parsed()) {
    ExperimentConfig config;
    if (!sweep_config.empty()) config = config_from_json(io::read_json_file(sweep_config));
    if (!sweep_network.empty()) config.network_file = fs::path(sweep_network);
    if (!sweep_samples.empty()) config.samples = sweep_samples;
    if (!sweep_noise.empty()) config.noise_fracs = sweep_noise;
    if (sweep_trials > 0) config.trials = sweep_trials;
    if (sweep_seed) config.seed = *sweep_seed;
    if (!sweep_out.empty())
      config.out_dir = fs::path(sweep_out);
    else if (sweep_config.empty())
      config.out_dir = default_out_dir();
    const ErrorReport report = run_sweep_to_dir(config);
    std::printf("wrote %s (%zu rows)\n", (config.out_dir / "sweep.csv").string().c_str(),
                report.rows.size());
    return 0;
  }

  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return e.kind() == Error::Kind::validation ? 2 : 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
}
