#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "radnet/errors.hpp"
#include "radnet/estimate.hpp"
#include "radnet/learn.hpp"
#include "radnet/network.hpp"
#include "radnet/simulate.hpp"

namespace radnet::io {

using nlohmann::json;

// Shortest round-trip decimal form; keeps emitted files byte-stable.
inline std::string format_double(double value) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

inline std::string hex_u64(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(value));
  return buf;
}

inline std::uint64_t parse_hex_u64(const std::string& text) {
  std::uint64_t value = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), value, 16);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size())
    throw ParseError("bad hex value: " + text);
  return value;
}

namespace detail {

inline void reject_unknown_fields(const json& obj, std::initializer_list<const char*> allowed,
                                  const std::string& where) {
  if (!obj.is_object()) throw ParseError(where + " must be a JSON object");
  for (const auto& [key, _] : obj.items()) {
    bool known = false;
    for (const char* k : allowed)
      if (key == k) {
        known = true;
        break;
      }
    if (!known) throw ParseError("unknown field \"" + key + "\" in " + where);
  }
}

template <class T>
T require(const json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key)) throw ParseError("missing field \"" + std::string(key) + "\" in " + where);
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ParseError("field \"" + std::string(key) + "\" in " + where + ": " + e.what());
  }
}

}  // namespace detail

inline json flow_spec_to_json(const FlowFunctionSpec& spec) {
  json j;
  j["family"] = to_string(spec.family);
  switch (spec.family) {
    case FlowFamily::linear_multi:
      j["c"] = spec.coeff;
      break;
    case FlowFamily::quadratic_boost:
      j["alpha"] = spec.alpha;
      j["beta"] = spec.beta;
      break;
    case FlowFamily::power_law:
      j["alpha"] = spec.alpha;
      j["gamma"] = spec.gamma;
      j["beta"] = spec.beta;
      break;
  }
  return j;
}

inline FlowFunctionSpec flow_spec_from_json(const json& j, const std::string& where) {
  const std::string family = detail::require<std::string>(j, "family", where);
  if (family == "linear-multi") {
    detail::reject_unknown_fields(j, {"family", "c"}, where);
    return FlowFunctionSpec::linear(detail::require<std::vector<double>>(j, "c", where));
  }
  if (family == "quadratic-boost") {
    detail::reject_unknown_fields(j, {"family", "alpha", "beta"}, where);
    return FlowFunctionSpec::quadratic(detail::require<double>(j, "alpha", where),
                                       j.contains("beta") ? j.at("beta").get<double>() : 0.0);
  }
  if (family == "power-law") {
    detail::reject_unknown_fields(j, {"family", "alpha", "gamma", "beta"}, where);
    return FlowFunctionSpec::power(detail::require<double>(j, "alpha", where),
                                   detail::require<double>(j, "gamma", where),
                                   j.contains("beta") ? j.at("beta").get<double>() : 0.0);
  }
  throw ParseError("unknown flow family \"" + family + "\" in " + where);
}

inline json network_to_json(const NetworkGraph& graph) {
  json edges = json::array();
  for (const CandidateEdge& e : graph.edges()) {
    json je;
    je["u"] = e.u;
    je["v"] = e.v;
    je["operational"] = e.operational;
    je["flow"] = flow_spec_to_json(e.flow);
    edges.push_back(std::move(je));
  }
  return json{{"nodes", graph.node_count()}, {"reference", graph.reference()}, {"edges", edges}};
}

inline NetworkGraph network_from_json(const json& j) {
  detail::reject_unknown_fields(j, {"nodes", "reference", "edges"}, "network");
  const int nodes = detail::require<int>(j, "nodes", "network");
  const int reference = detail::require<int>(j, "reference", "network");
  if (!j.contains("edges") || !j.at("edges").is_array())
    throw ParseError("network needs an \"edges\" array");
  std::vector<CandidateEdge> edges;
  std::size_t i = 0;
  for (const json& je : j.at("edges")) {
    const std::string where = "edges[" + std::to_string(i++) + "]";
    detail::reject_unknown_fields(je, {"u", "v", "operational", "flow"}, where);
    CandidateEdge e;
    e.u = detail::require<int>(je, "u", where);
    e.v = detail::require<int>(je, "v", where);
    e.operational = detail::require<bool>(je, "operational", where);
    if (!je.contains("flow")) throw ParseError("missing field \"flow\" in " + where);
    e.flow = flow_spec_from_json(je.at("flow"), where + ".flow");
    edges.push_back(std::move(e));
  }
  return NetworkGraph(nodes, reference, std::move(edges));
}

inline json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  return j;
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("failed while writing " + path.string());
}

inline void write_json_file(const std::filesystem::path& path, const json& j) {
  write_text_file(path, j.dump(2) + "\n");
}

inline NetworkGraph load_network(const std::filesystem::path& path) {
  return network_from_json(read_json_file(path));
}

inline void save_network(const NetworkGraph& graph, const std::filesystem::path& path) {
  write_json_file(path, network_to_json(graph));
}

// ---- measurement CSV + sidecar metadata ----------------------------------

inline std::filesystem::path meta_path_for(const std::filesystem::path& csv_path) {
  std::filesystem::path p = csv_path;
  p.replace_extension(".meta.json");
  return p;
}

inline void save_measurements(const MeasurementSet& ms, const std::filesystem::path& csv_path) {
  std::string text;
  text.reserve(ms.sample_count() * (ms.node_count() + 1) * 20);
  text += "sample_id";
  for (std::size_t c = 0; c < ms.node_count(); ++c) text += ",node_" + std::to_string(c);
  text += "\n";
  for (std::size_t s = 0; s < ms.sample_count(); ++s) {
    text += std::to_string(s);
    for (std::size_t c = 0; c < ms.node_count(); ++c) {
      text += ',';
      text += format_double(ms.samples(s, c));
    }
    text += "\n";
  }
  write_text_file(csv_path, text);

  json meta;
  meta["samples"] = ms.meta.samples;
  meta["nodes"] = ms.node_count();
  meta["seed"] = ms.meta.seed;
  meta["noise_frac"] = ms.meta.noise_frac;
  if (ms.meta.noise_seed) meta["noise_seed"] = *ms.meta.noise_seed;
  meta["network_hash"] = hex_u64(ms.meta.network_hash);
  write_json_file(meta_path_for(csv_path), meta);
}

inline MeasurementSet load_measurements(const std::filesystem::path& csv_path) {
  std::ifstream in(csv_path);
  if (!in) throw IoError("cannot open " + csv_path.string());
  std::string line;
  if (!std::getline(in, line)) throw ParseError(csv_path.string() + ": empty file");
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
  }
  if (header.empty() || header[0] != "sample_id")
    throw ParseError(csv_path.string() + ": first column must be sample_id");
  const std::size_t n = header.size() - 1;
  for (std::size_t c = 0; c < n; ++c)
    if (header[c + 1] != "node_" + std::to_string(c))
      throw ParseError(csv_path.string() + ": column " + std::to_string(c + 1) +
                       " must be node_" + std::to_string(c));

  std::vector<double> values;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::size_t col = 0;
    while (std::getline(ss, cell, ',')) {
      double v = 0.0;
      const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (res.ec != std::errc() || res.ptr != cell.data() + cell.size())
        throw ParseError(csv_path.string() + ": bad number \"" + cell + "\"");
      if (col == 0) {
        if (static_cast<std::size_t>(v) != rows)
          throw ParseError(csv_path.string() + ": sample_id must be consecutive from 0");
      } else {
        if (!std::isfinite(v))
          throw ParseError(csv_path.string() + ": non-finite potential \"" + cell + "\"");
        values.push_back(v);
      }
      ++col;
    }
    if (col != n + 1)
      throw ParseError(csv_path.string() + ": row " + std::to_string(rows) + " has " +
                       std::to_string(col) + " cells, expected " + std::to_string(n + 1));
    ++rows;
  }

  MeasurementSet ms;
  ms.samples = MatD(rows, n);
  ms.samples.storage() = std::move(values);
  ms.meta.samples = rows;

  const auto meta_path = meta_path_for(csv_path);
  if (std::filesystem::exists(meta_path)) {
    const json meta = read_json_file(meta_path);
    detail::reject_unknown_fields(
        meta, {"samples", "nodes", "seed", "noise_frac", "noise_seed", "network_hash"},
        meta_path.string());
    if (meta.contains("seed")) ms.meta.seed = meta.at("seed").get<std::uint64_t>();
    if (meta.contains("noise_frac")) ms.meta.noise_frac = meta.at("noise_frac").get<double>();
    if (meta.contains("noise_seed"))
      ms.meta.noise_seed = meta.at("noise_seed").get<std::uint64_t>();
    if (meta.contains("network_hash"))
      ms.meta.network_hash = parse_hex_u64(meta.at("network_hash").get<std::string>());
    if (meta.contains("samples") && meta.at("samples").get<std::size_t>() != rows)
      throw ParseError(meta_path.string() + ": sample count disagrees with the CSV");
  }
  return ms;
}

// ---- learned topology -----------------------------------------------------

inline json topology_to_json(const LearnedTopology& topo) {
  json edges = json::array();
  for (const LearnedEdge& e : topo.edges) {
    json je;
    je["u"] = e.u;
    je["v"] = e.v;
    je["weight"] = e.weight;
    je["margin"] = e.margin ? json(*e.margin) : json(nullptr);
    edges.push_back(std::move(je));
  }
  json j;
  j["edges"] = std::move(edges);
  j["total_weight"] = topo.total_weight;
  j["samples"] = topo.sample_count;
  j["groups"] = topo.groups;
  return j;
}

inline LearnedTopology topology_from_json(const json& j) {
  detail::reject_unknown_fields(j, {"edges", "total_weight", "samples", "groups", "complete_graph_agrees"},
                                "topology");
  LearnedTopology topo;
  for (const json& je : j.at("edges")) {
    detail::reject_unknown_fields(je, {"u", "v", "weight", "margin"}, "topology edge");
    LearnedEdge e;
    e.u = detail::require<int>(je, "u", "topology edge");
    e.v = detail::require<int>(je, "v", "topology edge");
    e.weight = detail::require<double>(je, "weight", "topology edge");
    if (je.contains("margin") && !je.at("margin").is_null())
      e.margin = je.at("margin").get<double>();
    topo.edges.push_back(e);
  }
  topo.total_weight = detail::require<double>(j, "total_weight", "topology");
  topo.sample_count = detail::require<std::size_t>(j, "samples", "topology");
  if (j.contains("groups")) topo.groups = j.at("groups").get<std::vector<std::vector<NodeId>>>();
  return topo;
}

// ---- injection model and estimates ----------------------------------------

inline json model_to_json(const InjectionModel& model) {
  json nodes = json::array();
  for (int a = 0; a < model.node_count(); ++a) {
    if (a == model.reference()) continue;
    json jn;
    jn["node"] = a;
    std::vector<double> mean, variance;
    for (std::size_t k = 0; k < model.commodities(); ++k) {
      mean.push_back(model.moments(a, k).mean);
      variance.push_back(model.moments(a, k).variance);
    }
    jn["mean"] = mean;
    jn["variance"] = variance;
    nodes.push_back(std::move(jn));
  }
  return json{{"nodes", model.node_count()},
              {"reference", model.reference()},
              {"commodities", model.commodities()},
              {"injections", nodes}};
}

inline InjectionModel model_from_json(const json& j) {
  detail::reject_unknown_fields(j, {"nodes", "reference", "commodities", "injections"}, "model");
  const int node_count = detail::require<int>(j, "nodes", "model");
  const int reference = detail::require<int>(j, "reference", "model");
  const std::size_t commodities = detail::require<std::size_t>(j, "commodities", "model");
  std::vector<std::vector<GaussianMoments>> moments(static_cast<std::size_t>(node_count));
  for (const json& jn : j.at("injections")) {
    detail::reject_unknown_fields(jn, {"node", "mean", "variance"}, "model injection");
    const int node = detail::require<int>(jn, "node", "model injection");
    if (node < 0 || node >= node_count) throw ParseError("model injection node out of range");
    const auto mean = detail::require<std::vector<double>>(jn, "mean", "model injection");
    const auto variance = detail::require<std::vector<double>>(jn, "variance", "model injection");
    if (mean.size() != commodities || variance.size() != commodities)
      throw ParseError("model injection arrays must match the commodity count");
    auto& slot = moments[static_cast<std::size_t>(node)];
    slot.resize(commodities);
    for (std::size_t k = 0; k < commodities; ++k) slot[k] = {mean[k], variance[k]};
  }
  return InjectionModel(node_count, reference, commodities, std::move(moments));
}

inline json estimate_to_json(const InjectionEstimate& est) {
  json nodes = json::array();
  for (const NodeMomentEstimate& n : est.nodes) {
    json jn;
    jn["node"] = n.node;
    jn["mean"] = n.mean;
    jn["variance"] = n.variance;
    nodes.push_back(std::move(jn));
  }
  return json{{"samples", est.sample_count},
              {"commodities", est.commodities},
              {"biased", est.biased},
              {"nodes", nodes}};
}

}  // namespace radnet::io
