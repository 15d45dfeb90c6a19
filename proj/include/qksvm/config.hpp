#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "qksvm/dataset.hpp"
#include "qksvm/experiment.hpp"

namespace qksvm::config {

using nlohmann::json;

struct DatasetConfig {
  std::string path;
  data::CsvSchema schema;
};

struct SynthConfig {
  std::string kind = "blobs";  // blobs | xor | cosine
  std::size_t per_class = 20;
  std::size_t count = 40;
  std::size_t dim = 2;
  double margin = 2.0;
  double freq = 2.0;
  std::uint64_t seed = 0;
  std::string path = "synthetic.csv";
};

struct ExperimentConfig {
  std::optional<DatasetConfig> dataset;
  std::optional<SynthConfig> synth;
  std::string output_dir = "out";
  std::size_t workers = 1;

  double test_fraction = 0.2;
  std::size_t folds = 5;
  std::uint64_t split_seed = 0;

  bool undersample_enabled = true;
  std::uint64_t undersample_seed = 0;

  experiment::GridSpec grid;

  // Explicit model for the eval / bound / kernel subcommands.
  std::optional<experiment::ModelConfig> model;

  double bound_delta = 0.05;

  // Random-Pauli study parameters.
  double study_t = 0.3;
  std::size_t study_s = 10;
  std::size_t study_n = 6;
  std::vector<double> study_c_values = {1e-4, 1e-3, 1e-2, 0.1, 1.0, 10.0, 100.0, 1000.0};
  std::vector<std::uint64_t> study_seeds;

  json resolved;  // the fully resolved configuration, for output headers
};

namespace detail {

inline void require_keys(const json& obj, std::initializer_list<const char*> allowed,
                         const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* key : allowed)
      if (it.key() == key) ok = true;
    if (!ok)
      throw std::runtime_error("config: unknown key '" + it.key() + "' in " + where);
  }
}

inline kernels::KernelFamily parse_family(const std::string& name) {
  if (name == "linear") return kernels::KernelFamily::Linear;
  if (name == "rbf") return kernels::KernelFamily::Rbf;
  if (name == "poly" || name == "polynomial") return kernels::KernelFamily::Polynomial;
  throw std::runtime_error("config: unknown kernel family '" + name + "'");
}

inline experiment::ModelConfig parse_model(const json& obj) {
  require_keys(obj, {"kind", "n", "t", "s", "pauli_seed", "C", "family", "gamma",
                     "degree", "coef0"},
               "model");
  experiment::ModelConfig mc;
  const std::string kind = obj.at("kind").get<std::string>();
  mc.penalty = obj.at("C").get<double>();
  if (kind == "quantum") {
    mc.is_quantum = true;
    mc.quantum.n = obj.at("n").get<std::size_t>();
    mc.quantum.t = obj.at("t").get<double>();
    mc.quantum.s = obj.at("s").get<std::size_t>();
    mc.quantum.pauli_seed = obj.at("pauli_seed").get<std::uint64_t>();
  } else if (kind == "classical") {
    mc.is_quantum = false;
    mc.classical.family = parse_family(obj.at("family").get<std::string>());
    if (obj.contains("gamma")) mc.classical.gamma = obj.at("gamma").get<double>();
    if (obj.contains("degree")) mc.classical.degree = obj.at("degree").get<int>();
    if (obj.contains("coef0")) mc.classical.coef0 = obj.at("coef0").get<double>();
  } else {
    throw std::runtime_error("config: model.kind must be 'quantum' or 'classical'");
  }
  return mc;
}

// Sets obj[dotted.path] = value, creating objects along the way.
inline void apply_override(json& root, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos)
    throw std::runtime_error("override must look like key.path=value: " + assignment);
  const std::string path = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  json value;
  try {
    value = json::parse(raw);
  } catch (const json::parse_error&) {
    value = raw;  // bare string
  }
  json* node = &root;
  std::size_t start = 0;
  for (;;) {
    const auto dot = path.find('.', start);
    const std::string key = path.substr(start, dot - start);
    if (key.empty()) throw std::runtime_error("override has an empty path segment");
    if (dot == std::string::npos) {
      (*node)[key] = value;
      return;
    }
    node = &(*node)[key];
    start = dot + 1;
  }
}

}  // namespace detail

inline ExperimentConfig parse_config(const json& root) {
  detail::require_keys(root,
                       {"dataset", "synth", "output_dir", "workers", "split",
                        "undersample", "quantum_grid", "classical_grids", "model",
                        "bound", "study"},
                       "top level");
  ExperimentConfig cfg;
  cfg.resolved = root;

  if (root.contains("dataset")) {
    const json& d = root["dataset"];
    detail::require_keys(d, {"path", "label_column", "label_map", "id_column"},
                         "dataset");
    DatasetConfig dc;
    dc.path = d.at("path").get<std::string>();
    if (d.contains("label_column"))
      dc.schema.label_column = d["label_column"].get<std::string>();
    if (d.contains("label_map")) {
      dc.schema.label_map.clear();
      for (auto it = d["label_map"].begin(); it != d["label_map"].end(); ++it)
        dc.schema.label_map[it.key()] = it.value().get<int>();
    }
    if (d.contains("id_column")) dc.schema.id_column = d["id_column"].get<std::string>();
    cfg.dataset = std::move(dc);
  }
  if (root.contains("synth")) {
    const json& s = root["synth"];
    detail::require_keys(
        s, {"kind", "per_class", "count", "dim", "margin", "freq", "seed", "path"},
        "synth");
    SynthConfig sc;
    if (s.contains("kind")) sc.kind = s["kind"].get<std::string>();
    if (s.contains("per_class")) sc.per_class = s["per_class"].get<std::size_t>();
    if (s.contains("count")) sc.count = s["count"].get<std::size_t>();
    if (s.contains("dim")) sc.dim = s["dim"].get<std::size_t>();
    if (s.contains("margin")) sc.margin = s["margin"].get<double>();
    if (s.contains("freq")) sc.freq = s["freq"].get<double>();
    if (s.contains("seed")) sc.seed = s["seed"].get<std::uint64_t>();
    if (s.contains("path")) sc.path = s["path"].get<std::string>();
    cfg.synth = std::move(sc);
  }
  if (root.contains("output_dir")) cfg.output_dir = root["output_dir"].get<std::string>();
  if (root.contains("workers")) cfg.workers = root["workers"].get<std::size_t>();

  if (root.contains("split")) {
    const json& s = root["split"];
    detail::require_keys(s, {"test_fraction", "folds", "seed"}, "split");
    if (s.contains("test_fraction")) cfg.test_fraction = s["test_fraction"].get<double>();
    if (s.contains("folds")) cfg.folds = s["folds"].get<std::size_t>();
    if (s.contains("seed")) cfg.split_seed = s["seed"].get<std::uint64_t>();
  }
  if (root.contains("undersample")) {
    const json& u = root["undersample"];
    detail::require_keys(u, {"enabled", "seed"}, "undersample");
    if (u.contains("enabled")) cfg.undersample_enabled = u["enabled"].get<bool>();
    if (u.contains("seed")) cfg.undersample_seed = u["seed"].get<std::uint64_t>();
  }

  if (root.contains("quantum_grid")) {
    const json& q = root["quantum_grid"];
    detail::require_keys(q, {"n", "t", "s", "C", "pauli_seeds"}, "quantum_grid");
    experiment::QuantumGrid grid;
    if (q.contains("n")) grid.n = q["n"].get<std::size_t>();
    if (q.contains("t")) grid.t_values = q["t"].get<std::vector<double>>();
    if (q.contains("s")) grid.s_values = q["s"].get<std::vector<std::size_t>>();
    if (q.contains("C")) grid.c_values = q["C"].get<std::vector<double>>();
    if (q.contains("pauli_seeds"))
      grid.pauli_seeds = q["pauli_seeds"].get<std::vector<std::uint64_t>>();
    cfg.grid.quantum = std::move(grid);
  }
  if (root.contains("classical_grids")) {
    for (const json& c : root["classical_grids"]) {
      detail::require_keys(c, {"family", "C", "gamma", "degree", "coef0"},
                           "classical_grids[]");
      experiment::ClassicalGrid grid;
      grid.family = detail::parse_family(c.at("family").get<std::string>());
      if (c.contains("C")) grid.c_values = c["C"].get<std::vector<double>>();
      if (c.contains("gamma")) grid.gammas = c["gamma"].get<std::vector<double>>();
      if (c.contains("degree")) grid.degrees = c["degree"].get<std::vector<int>>();
      if (c.contains("coef0")) grid.coef0 = c["coef0"].get<double>();
      cfg.grid.classical.push_back(std::move(grid));
    }
  }

  if (root.contains("model")) cfg.model = detail::parse_model(root["model"]);

  if (root.contains("bound")) {
    detail::require_keys(root["bound"], {"delta"}, "bound");
    if (root["bound"].contains("delta"))
      cfg.bound_delta = root["bound"]["delta"].get<double>();
  }
  if (root.contains("study")) {
    const json& s = root["study"];
    detail::require_keys(s, {"t", "s", "n", "C", "seeds"}, "study");
    if (s.contains("t")) cfg.study_t = s["t"].get<double>();
    if (s.contains("s")) cfg.study_s = s["s"].get<std::size_t>();
    if (s.contains("n")) cfg.study_n = s["n"].get<std::size_t>();
    if (s.contains("C")) cfg.study_c_values = s["C"].get<std::vector<double>>();
    if (s.contains("seeds"))
      cfg.study_seeds = s["seeds"].get<std::vector<std::uint64_t>>();
  }
  return cfg;
}

inline ExperimentConfig load_config(const std::filesystem::path& path,
                                    const std::vector<std::string>& overrides = {}) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open " + path.string());
  json root = json::parse(in);
  for (const std::string& assignment : overrides)
    detail::apply_override(root, assignment);
  return parse_config(root);
}

}  // namespace qksvm::config
