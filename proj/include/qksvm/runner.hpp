#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "qksvm/config.hpp"
#include "qksvm/synth.hpp"

namespace qksvm::runner {

using config::ExperimentConfig;
using config::json;

// Training/test arrays after the full preprocessing chain:
// stratified split -> undersample the training portion -> fit z-score
// standardization on the (undersampled) training rows -> apply everywhere.
struct PreparedData {
  data::Dataset raw;
  data::SplitPlan plan;                     // dataset-index space
  std::vector<std::size_t> train_indices;   // after undersampling
  data::StandardizationParams standardizer;
  kernels::Samples train_samples;
  std::vector<int> train_labels;
  kernels::Samples test_samples;
  std::vector<int> test_labels;
  std::vector<std::vector<std::size_t>> fold_positions;  // into train arrays
};

inline data::Dataset materialize_dataset(const ExperimentConfig& cfg) {
  if (cfg.dataset) return data::load_csv(cfg.dataset->path, cfg.dataset->schema);
  if (cfg.synth) {
    const config::SynthConfig& s = *cfg.synth;
    if (s.kind == "blobs") return data::make_blobs(s.per_class, s.dim, s.margin, s.seed);
    if (s.kind == "xor") return data::make_xor();
    if (s.kind == "cosine") return data::make_cosine(s.count, s.dim, s.freq, s.seed);
    throw std::runtime_error("synth.kind must be blobs, xor, or cosine");
  }
  throw std::runtime_error("config needs either a 'dataset' or a 'synth' section");
}

inline PreparedData prepare(const ExperimentConfig& cfg) {
  PreparedData prep;
  prep.raw = materialize_dataset(cfg);
  prep.plan = data::stratified_split(prep.raw, cfg.test_fraction, cfg.split_seed);
  prep.train_indices =
      cfg.undersample_enabled
          ? data::undersample(prep.raw, prep.plan.train, cfg.undersample_seed)
          : prep.plan.train;
  prep.standardizer = data::fit_standardizer(prep.raw, prep.train_indices);
  const data::Dataset scaled = data::apply_standardizer(prep.raw, prep.standardizer);

  for (std::size_t i : prep.train_indices) {
    prep.train_samples.push_back(scaled.samples[i]);
    prep.train_labels.push_back(scaled.labels[i]);
  }
  for (std::size_t i : prep.plan.test) {
    prep.test_samples.push_back(scaled.samples[i]);
    prep.test_labels.push_back(scaled.labels[i]);
  }

  prep.plan.folds = data::stratified_folds(prep.train_indices, prep.raw.labels,
                                           cfg.folds, cfg.split_seed);
  for (const auto& fold : prep.plan.folds) {
    std::vector<std::size_t> positions;
    for (std::size_t i : fold) {
      const auto it =
          std::lower_bound(prep.train_indices.begin(), prep.train_indices.end(), i);
      positions.push_back(
          static_cast<std::size_t>(it - prep.train_indices.begin()));
    }
    prep.fold_positions.push_back(std::move(positions));
  }
  return prep;
}

namespace detail {

inline std::filesystem::path out_path(const ExperimentConfig& cfg,
                                      const std::string& name) {
  std::filesystem::create_directories(cfg.output_dir);
  return std::filesystem::path(cfg.output_dir) / name;
}

inline void write_json(const std::filesystem::path& path, const json& doc) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  out << doc.dump(2) << "\n";
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

inline json model_to_json(const experiment::ModelConfig& mc) {
  json j;
  j["C"] = mc.penalty;
  if (mc.is_quantum) {
    j["kind"] = "quantum";
    j["n"] = mc.quantum.n;
    j["t"] = mc.quantum.t;
    j["s"] = mc.quantum.s;
    j["pauli_seed"] = mc.quantum.pauli_seed;
  } else {
    j["kind"] = "classical";
    j["descriptor"] = mc.classical.describe();
  }
  return j;
}

inline const experiment::ModelConfig& require_model(const ExperimentConfig& cfg) {
  if (!cfg.model)
    throw std::runtime_error("this subcommand needs a 'model' section in the config");
  return *cfg.model;
}

}  // namespace detail

// kernel: Gram matrix over the prepared training set -> CSV + binary cache.
// Returns the content hash.
inline std::uint64_t run_kernel(const ExperimentConfig& cfg) {
  const experiment::ModelConfig& model = detail::require_model(cfg);
  const PreparedData prep = prepare(cfg);
  experiment::GramProvider provider(prep.train_samples, cfg.workers,
                                    detail::out_path(cfg, "cache"));
  const kernels::KernelMatrix& gram = provider.full_gram(model);
  kernels::write_gram_csv(detail::out_path(cfg, "gram.csv"), gram,
                          "config: " + cfg.resolved.dump());
  return kernels::gram_content_hash(prep.train_samples, model.kernel_key());
}

// gridsearch: full CV over the grid -> report JSON + per-configuration CSV +
// chosen model trained on the whole training set + split plan for replay.
inline experiment::CvReport run_gridsearch(const ExperimentConfig& cfg) {
  const PreparedData prep = prepare(cfg);
  experiment::GramProvider provider(prep.train_samples, cfg.workers,
                                    detail::out_path(cfg, "cache"));
  const auto configs = cfg.grid.enumerate();
  const experiment::CvReport report =
      experiment::run_cv(provider, prep.train_labels, prep.fold_positions, configs);

  json doc;
  doc["resolved_config"] = cfg.resolved;
  doc["chosen_index"] = report.chosen;
  doc["chosen"] = detail::model_to_json(report.results[report.chosen].config);
  json results = json::array();
  for (const auto& r : report.results) {
    json entry;
    entry["config"] = detail::model_to_json(r.config);
    entry["mean_train_accuracy"] = r.mean_train;
    entry["std_train_accuracy"] = r.std_train;
    entry["mean_val_accuracy"] = r.mean_val;
    entry["std_val_accuracy"] = r.std_val;
    json folds = json::array();
    for (const auto& f : r.folds)
      folds.push_back({{"train_accuracy", f.train_accuracy},
                       {"val_accuracy", f.val_accuracy}});
    entry["folds"] = folds;
    results.push_back(entry);
  }
  doc["results"] = results;
  detail::write_json(detail::out_path(cfg, "cv_report.json"), doc);

  {
    std::ofstream csv(detail::out_path(cfg, "cv_table.csv"));
    csv << "# config: " << cfg.resolved.dump() << "\n";
    csv << "index,kernel,C,mean_train,std_train,mean_val,std_val\n";
    char buf[512];
    for (std::size_t i = 0; i < report.results.size(); ++i) {
      const auto& r = report.results[i];
      std::snprintf(buf, sizeof buf, "%zu,%s,%.17g,%.17g,%.17g,%.17g,%.17g\n", i,
                    r.config.kernel_key().c_str(), r.config.penalty, r.mean_train,
                    r.std_train, r.mean_val, r.std_val);
      csv << buf;
    }
  }

  const auto& chosen = report.results[report.chosen].config;
  const kernels::KernelMatrix& gram = provider.full_gram(chosen);
  svm::SvmModel model = svm::solve_dual(gram, prep.train_labels, chosen.penalty);
  model.training_samples = prep.train_samples;
  svm::save_model(detail::out_path(cfg, "chosen_model.txt"), model);
  data::save_split_plan(detail::out_path(cfg, "split_plan.txt"), prep.plan);
  return report;
}

// eval: retrain the explicit model on the training set, score the test set.
inline experiment::TestReport run_eval(const ExperimentConfig& cfg) {
  const experiment::ModelConfig& model = detail::require_model(cfg);
  const PreparedData prep = prepare(cfg);
  experiment::GramProvider provider(prep.train_samples, cfg.workers,
                                    detail::out_path(cfg, "cache"));
  experiment::TestReport report =
      experiment::evaluate_test(provider, prep.train_labels, prep.test_samples,
                                prep.test_labels, model, cfg.workers);
  json doc;
  doc["resolved_config"] = cfg.resolved;
  doc["model"] = detail::model_to_json(model);
  doc["test_accuracy"] = report.accuracy;
  doc["confusion"] = {{"tp", report.true_positive},
                      {"tn", report.true_negative},
                      {"fp", report.false_positive},
                      {"fn", report.false_negative}};
  detail::write_json(detail::out_path(cfg, "eval.json"), doc);
  svm::save_model(detail::out_path(cfg, "eval_model.txt"), report.model);
  return report;
}

// bound: train the explicit quantum model, evaluate the generalization bound.
inline experiment::BoundReport run_bound(const ExperimentConfig& cfg) {
  const experiment::ModelConfig& model = detail::require_model(cfg);
  if (!model.is_quantum)
    throw std::runtime_error("bound: the model must be a quantum kernel");
  const PreparedData prep = prepare(cfg);
  experiment::GramProvider provider(prep.train_samples, cfg.workers,
                                    detail::out_path(cfg, "cache"));
  const kernels::KernelMatrix& gram = provider.full_gram(model);
  const svm::SvmModel solved = svm::solve_dual(gram, prep.train_labels, model.penalty);
  const qsim::EncodingSpec spec = model.quantum.make_spec(prep.train_samples.front().size());
  const experiment::BoundReport report = experiment::generalization_bound(
      solved.alphas, prep.train_samples, spec, cfg.bound_delta);

  json doc;
  doc["resolved_config"] = cfg.resolved;
  doc["model"] = detail::model_to_json(model);
  doc["alpha_norm_sq"] = report.alpha_norm_sq;
  doc["kappa"] = report.kappa;
  doc["kappa_negative"] = report.kappa_negative;
  doc["t"] = report.evolution_time;
  doc["M"] = report.sample_count;
  doc["delta"] = report.delta;
  doc["bound"] = report.bound;
  detail::write_json(detail::out_path(cfg, "bound.json"), doc);
  return report;
}

// study: repeated random-Pauli experiment -> JSON report + plotting CSV.
inline experiment::StudyReport run_study(const ExperimentConfig& cfg) {
  if (cfg.study_seeds.empty())
    throw std::runtime_error("study: config needs study.seeds");
  const PreparedData prep = prepare(cfg);
  experiment::GramProvider provider(prep.train_samples, cfg.workers,
                                    detail::out_path(cfg, "cache"));
  const experiment::StudyReport report = experiment::random_pauli_study(
      provider, prep.train_labels, prep.fold_positions, prep.test_samples,
      prep.test_labels, cfg.study_t, cfg.study_s, cfg.study_n, cfg.study_c_values,
      cfg.study_seeds, cfg.grid.classical, cfg.workers);

  json doc;
  doc["resolved_config"] = cfg.resolved;
  json rows = json::array();
  for (const auto& row : report.rows)
    rows.push_back({{"pauli_seed", row.pauli_seed},
                    {"chosen_C", row.chosen_penalty},
                    {"mean_train_accuracy", row.mean_train_accuracy},
                    {"mean_val_accuracy", row.mean_val_accuracy},
                    {"test_accuracy", row.test_accuracy}});
  doc["rows"] = rows;
  if (!cfg.grid.classical.empty()) {
    doc["best_classical_test_accuracy"] = report.best_classical_test_accuracy;
    doc["best_classical"] = detail::model_to_json(report.best_classical_config);
  }
  detail::write_json(detail::out_path(cfg, "study.json"), doc);

  std::ofstream csv(detail::out_path(cfg, "study.csv"));
  csv << "# config: " << cfg.resolved.dump() << "\n";
  csv << "pauli_seed,chosen_C,mean_train,mean_val,test_accuracy\n";
  char buf[256];
  for (const auto& row : report.rows) {
    std::snprintf(buf, sizeof buf, "%llu,%.17g,%.17g,%.17g,%.17g\n",
                  static_cast<unsigned long long>(row.pauli_seed), row.chosen_penalty,
                  row.mean_train_accuracy, row.mean_val_accuracy, row.test_accuracy);
    csv << buf;
  }
  return report;
}

// synth: write a synthetic dataset CSV into the output directory.
inline std::filesystem::path run_synth(const ExperimentConfig& cfg) {
  if (!cfg.synth) throw std::runtime_error("synth: config needs a 'synth' section");
  const data::Dataset ds = materialize_dataset(cfg);
  const auto path = detail::out_path(cfg, cfg.synth->path);
  data::write_dataset_csv(path, ds, "config: " + cfg.resolved.dump());
  return path;
}

}  // namespace qksvm::runner
