#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "qksvm/dataset.hpp"
#include "qksvm/gram.hpp"
#include "qksvm/rng.hpp"
#include "qksvm/svm.hpp"

namespace qksvm::experiment {

// d Pauli strings drawn i.i.d. uniformly from the 4^n-element set; duplicates
// permitted.
inline std::vector<qsim::PauliString> sample_pauli_strings(std::size_t d, std::size_t n,
                                                           std::uint64_t seed) {
  if (d < 1 || n < 1)
    throw std::invalid_argument("sample_pauli_strings: need d >= 1 and n >= 1");
  Rng rng(seed);
  std::vector<qsim::PauliString> strings;
  strings.reserve(d);
  for (std::size_t j = 0; j < d; ++j) {
    std::vector<qsim::Pauli> symbols(n);
    for (std::size_t q = 0; q < n; ++q)
      symbols[q] = static_cast<qsim::Pauli>(uniform_index(rng, 4));
    strings.emplace_back(std::move(symbols));
  }
  return strings;
}

// ---- model configurations ---------------------------------------------------

struct QuantumKernelConfig {
  std::size_t n = 6;
  double t = 0.1;
  std::size_t s = 10;
  std::uint64_t pauli_seed = 0;

  std::string describe() const {
    char buf[128];
    std::snprintf(buf, sizeof buf, "quantum n=%zu t=%.17g s=%zu pauli_seed=%llu", n, t,
                  s, static_cast<unsigned long long>(pauli_seed));
    return buf;
  }

  qsim::EncodingSpec make_spec(std::size_t d) const {
    return qsim::EncodingSpec(n, sample_pauli_strings(d, n, pauli_seed), t, s);
  }
};

struct ModelConfig {
  bool is_quantum = false;
  QuantumKernelConfig quantum;
  kernels::ClassicalKernelParams classical;
  double penalty = 1.0;  // C

  // Identifies the Gram matrix (everything except C).
  std::string kernel_key() const {
    return is_quantum ? quantum.describe() : classical.describe();
  }

  std::string describe() const {
    char buf[32];
    std::snprintf(buf, sizeof buf, " C=%.17g", penalty);
    return kernel_key() + buf;
  }
};

struct QuantumGrid {
  std::size_t n = 6;
  std::vector<double> t_values = {0.05, 0.1, 0.15, 0.2, 0.3, 0.5, 1.0};
  std::vector<std::size_t> s_values = {1, 2, 5, 10, 20};
  std::vector<double> c_values = {1e-4, 1e-3, 1e-2, 0.1, 1.0, 10.0, 100.0, 1000.0};
  std::vector<std::uint64_t> pauli_seeds = {0};
};

struct ClassicalGrid {
  kernels::KernelFamily family = kernels::KernelFamily::Rbf;
  std::vector<double> c_values = {1e-4, 1e-3, 1e-2, 0.1, 1.0, 10.0, 100.0, 1000.0};
  std::vector<double> gammas = {1e-3, 1e-2, 0.1, 1.0};  // rbf / polynomial
  std::vector<int> degrees = {2, 3};                    // polynomial
  double coef0 = 0.0;                                   // polynomial
};

struct GridSpec {
  std::optional<QuantumGrid> quantum;
  std::vector<ClassicalGrid> classical;

  // Deterministic enumeration: quantum configurations first
  // (seed > t > s > C nesting), then each classical family in listed order.
  std::vector<ModelConfig> enumerate() const {
    std::vector<ModelConfig> configs;
    if (quantum) {
      for (std::uint64_t seed : quantum->pauli_seeds)
        for (double t : quantum->t_values)
          for (std::size_t s : quantum->s_values)
            for (double c : quantum->c_values) {
              ModelConfig mc;
              mc.is_quantum = true;
              mc.quantum = {quantum->n, t, s, seed};
              mc.penalty = c;
              configs.push_back(mc);
            }
    }
    for (const ClassicalGrid& grid : classical) {
      const bool needs_gamma = grid.family != kernels::KernelFamily::Linear;
      const bool needs_degree = grid.family == kernels::KernelFamily::Polynomial;
      const std::vector<double> gammas = needs_gamma ? grid.gammas
                                                     : std::vector<double>{1.0};
      const std::vector<int> degrees = needs_degree ? grid.degrees
                                                    : std::vector<int>{1};
      for (double c : grid.c_values)
        for (double gamma : gammas)
          for (int degree : degrees) {
            ModelConfig mc;
            mc.is_quantum = false;
            mc.classical.family = grid.family;
            mc.classical.gamma = gamma;
            mc.classical.degree = degree;
            mc.classical.coef0 = grid.coef0;
            mc.penalty = c;
            configs.push_back(mc);
          }
    }
    if (configs.empty()) throw std::invalid_argument("GridSpec: empty grid");
    return configs;
  }
};

// ---- Gram provider with in-memory + optional on-disk cache ------------------

class GramProvider {
 public:
  GramProvider(kernels::Samples samples, std::size_t workers = 1,
               std::optional<std::filesystem::path> cache_dir = std::nullopt)
      : samples_(std::move(samples)), workers_(workers), cache_dir_(std::move(cache_dir)) {}

  const kernels::Samples& samples() const { return samples_; }

  // Full Gram over the provider's samples for the configuration's kernel;
  // computed once per kernel key.
  const kernels::KernelMatrix& full_gram(const ModelConfig& config) {
    const std::string key = config.kernel_key();
    {
      std::lock_guard<std::mutex> lock(mutex_);
      if (auto it = memo_.find(key); it != memo_.end()) return *it->second;
    }
    auto gram = std::make_unique<kernels::KernelMatrix>(compute(config, key));
    std::lock_guard<std::mutex> lock(mutex_);
    auto [it, inserted] = memo_.emplace(key, std::move(gram));
    return *it->second;
  }

 private:
  kernels::KernelMatrix compute(const ModelConfig& config, const std::string& key) {
    const std::uint64_t hash = kernels::gram_content_hash(samples_, key);
    kernels::KernelMatrix gram;
    if (cache_dir_ && kernels::gram_cache_load(*cache_dir_, hash, gram)) {
      gram.kind = key;
      return gram;
    }
    gram = config.is_quantum
               ? kernels::quantum_gram(samples_,
                                       config.quantum.make_spec(samples_.front().size()),
                                       workers_)
               : kernels::classical_gram_square(samples_, config.classical);
    gram.kind = key;
    if (cache_dir_) kernels::gram_cache_store(*cache_dir_, hash, gram);
    return gram;
  }

  kernels::Samples samples_;
  std::size_t workers_;
  std::optional<std::filesystem::path> cache_dir_;
  std::mutex mutex_;
  std::map<std::string, std::unique_ptr<kernels::KernelMatrix>> memo_;
};

// ---- cross-validation -------------------------------------------------------

struct FoldMetric {
  double train_accuracy = 0.0;
  double val_accuracy = 0.0;
};

struct ConfigResult {
  ModelConfig config;
  std::vector<FoldMetric> folds;
  double mean_train = 0.0;
  double std_train = 0.0;
  double mean_val = 0.0;
  double std_val = 0.0;
};

struct CvReport {
  std::vector<ConfigResult> results;
  std::size_t chosen = 0;
};

namespace detail {

inline void mean_std(const std::vector<double>& values, double& mean, double& std_dev) {
  mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  std_dev = 0.0;
  for (double v : values) std_dev += (v - mean) * (v - mean);
  std_dev = std::sqrt(std_dev / static_cast<double>(values.size()));
}

// Gram slice for the sub-problem over `rows` x `cols` positions.
inline kernels::KernelMatrix slice_square(const kernels::KernelMatrix& gram,
                                          const std::vector<std::size_t>& positions) {
  kernels::KernelMatrix out;
  out.size = positions.size();
  out.kind = gram.kind;
  out.entries.resize(out.size * out.size);
  for (std::size_t a = 0; a < out.size; ++a)
    for (std::size_t b = 0; b < out.size; ++b)
      out.at(a, b) = gram.at(positions[a], positions[b]);
  return out;
}

inline kernels::CrossKernel slice_cross(const kernels::KernelMatrix& gram,
                                        const std::vector<std::size_t>& rows,
                                        const std::vector<std::size_t>& cols) {
  kernels::CrossKernel out;
  out.rows = rows.size();
  out.cols = cols.size();
  out.entries.resize(out.rows * out.cols);
  for (std::size_t a = 0; a < out.rows; ++a)
    for (std::size_t b = 0; b < out.cols; ++b)
      out.at(a, b) = gram.at(rows[a], cols[b]);
  return out;
}

inline double accuracy(const std::vector<int>& predicted, const std::vector<int>& truth) {
  std::size_t correct = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i)
    if (predicted[i] == truth[i]) ++correct;
  return static_cast<double>(correct) / static_cast<double>(predicted.size());
}

}  // namespace detail

// Train on k-1 folds / validate on the held-out fold for every configuration;
// the full training Gram is computed once per kernel and sliced per fold.
// Selection: highest mean validation accuracy, ties broken by smallest
// (mean train - mean validation) gap, then by lowest configuration index.
inline CvReport run_cv(GramProvider& provider, const std::vector<int>& labels,
                       const std::vector<std::vector<std::size_t>>& folds,
                       const std::vector<ModelConfig>& configs) {
  if (configs.empty()) throw std::invalid_argument("run_cv: empty grid");
  if (folds.size() < 2) throw std::invalid_argument("run_cv: need >= 2 folds");
  for (const auto& fold : folds) {
    bool pos = false, neg = false;
    for (std::size_t i : fold) (labels.at(i) > 0 ? pos : neg) = true;
    if (!pos || !neg)
      throw std::invalid_argument("run_cv: a fold is missing a class");
  }

  CvReport report;
  report.results.reserve(configs.size());
  for (const ModelConfig& config : configs) {
    const kernels::KernelMatrix& gram = provider.full_gram(config);
    ConfigResult result;
    result.config = config;
    std::vector<double> train_accs, val_accs;
    for (std::size_t f = 0; f < folds.size(); ++f) {
      std::vector<std::size_t> train_pos;
      for (std::size_t g = 0; g < folds.size(); ++g)
        if (g != f) train_pos.insert(train_pos.end(), folds[g].begin(), folds[g].end());
      std::sort(train_pos.begin(), train_pos.end());
      const std::vector<std::size_t>& val_pos = folds[f];

      std::vector<int> train_labels, val_labels;
      for (std::size_t i : train_pos) train_labels.push_back(labels[i]);
      for (std::size_t i : val_pos) val_labels.push_back(labels[i]);

      const auto sub = detail::slice_square(gram, train_pos);
      const svm::SvmModel model = svm::solve_dual(sub, train_labels, config.penalty);

      const auto self_cross = detail::slice_cross(gram, train_pos, train_pos);
      const auto val_cross = detail::slice_cross(gram, val_pos, train_pos);
      FoldMetric metric;
      metric.train_accuracy =
          detail::accuracy(svm::predict_all(model, self_cross), train_labels);
      metric.val_accuracy =
          detail::accuracy(svm::predict_all(model, val_cross), val_labels);
      result.folds.push_back(metric);
      train_accs.push_back(metric.train_accuracy);
      val_accs.push_back(metric.val_accuracy);
    }
    detail::mean_std(train_accs, result.mean_train, result.std_train);
    detail::mean_std(val_accs, result.mean_val, result.std_val);
    report.results.push_back(std::move(result));
  }

  report.chosen = 0;
  for (std::size_t i = 1; i < report.results.size(); ++i) {
    const ConfigResult& best = report.results[report.chosen];
    const ConfigResult& cand = report.results[i];
    if (cand.mean_val > best.mean_val) {
      report.chosen = i;
    } else if (cand.mean_val == best.mean_val) {
      const double best_gap = best.mean_train - best.mean_val;
      const double cand_gap = cand.mean_train - cand.mean_val;
      if (cand_gap < best_gap) report.chosen = i;
    }
  }
  return report;
}

// ---- test evaluation --------------------------------------------------------

struct TestReport {
  double accuracy = 0.0;
  std::size_t true_positive = 0;
  std::size_t true_negative = 0;
  std::size_t false_positive = 0;
  std::size_t false_negative = 0;
  svm::SvmModel model;
};

// Retrain on the full training set and score the held-out test set.
inline TestReport evaluate_test(GramProvider& train_provider,
                                const std::vector<int>& train_labels,
                                const kernels::Samples& test_samples,
                                const std::vector<int>& test_labels,
                                const ModelConfig& config, std::size_t workers = 1) {
  const kernels::KernelMatrix& gram = train_provider.full_gram(config);
  svm::SvmModel model = svm::solve_dual(gram, train_labels, config.penalty);
  model.training_samples = train_provider.samples();

  const kernels::CrossKernel cross =
      config.is_quantum
          ? kernels::quantum_cross_gram(
                train_provider.samples(), test_samples,
                config.quantum.make_spec(train_provider.samples().front().size()),
                workers)
          : kernels::classical_gram(test_samples, train_provider.samples(),
                                    config.classical);
  const std::vector<int> predicted = svm::predict_all(model, cross);

  TestReport report;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    if (test_labels[i] > 0)
      (predicted[i] > 0 ? report.true_positive : report.false_negative)++;
    else
      (predicted[i] < 0 ? report.true_negative : report.false_positive)++;
  }
  report.accuracy = static_cast<double>(report.true_positive + report.true_negative) /
                    static_cast<double>(predicted.size());
  report.model = std::move(model);
  return report;
}

// ---- generalization bound ---------------------------------------------------

struct BoundReport {
  double alpha_norm_sq = 0.0;
  double kappa = 0.0;
  double evolution_time = 0.0;
  std::size_t sample_count = 0;
  double delta = 1.0;
  double bound = 0.0;
  bool kappa_negative = false;  // flagged, never clamped
};

// Upper bound 8(||alpha||^2 + kappa t^2)/sqrt(M) * (1 + 1/2 sqrt(log(1/delta)/2))
// with kappa = sum_ij alpha_i alpha_j (h_i - h_j)^2, h_i = <0^n|H(x_i)|0^n>.
inline BoundReport generalization_bound(const std::vector<double>& alphas,
                                        const kernels::Samples& samples,
                                        const qsim::EncodingSpec& spec, double delta) {
  if (!(delta > 0.0) || delta > 1.0)
    throw std::invalid_argument("generalization_bound: delta must be in (0, 1]");
  if (alphas.size() != samples.size())
    throw std::invalid_argument("generalization_bound: alpha length != M");
  const std::size_t m = alphas.size();
  if (m == 0) throw std::invalid_argument("generalization_bound: empty sample set");

  BoundReport report;
  report.evolution_time = spec.evolution_time;
  report.sample_count = m;
  report.delta = delta;

  std::vector<double> h(m);
  for (std::size_t i = 0; i < m; ++i)
    h[i] = qsim::hamiltonian_expectation_zero(samples[i], spec);

  for (double a : alphas) report.alpha_norm_sq += a * a;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      const double diff = h[i] - h[j];
      report.kappa += alphas[i] * alphas[j] * diff * diff;
    }
  report.kappa_negative = report.kappa < 0.0;

  const double multiplier = 1.0 + 0.5 * std::sqrt(std::log(1.0 / delta) / 2.0);
  report.bound = 8.0 *
                 (report.alpha_norm_sq +
                  report.kappa * spec.evolution_time * spec.evolution_time) /
                 std::sqrt(static_cast<double>(m)) * multiplier;
  return report;
}

// ---- repeated random-Pauli study --------------------------------------------

struct StudyRow {
  std::uint64_t pauli_seed = 0;
  double chosen_penalty = 0.0;
  double mean_train_accuracy = 0.0;
  double mean_val_accuracy = 0.0;
  double test_accuracy = 0.0;
};

struct StudyReport {
  std::vector<StudyRow> rows;
  double best_classical_test_accuracy = 0.0;
  ModelConfig best_classical_config;
};

// One (sample Paulis -> CV over C -> test) pass per seed at fixed (t, s, n),
// plus the best classical baseline for reference.
inline StudyReport random_pauli_study(
    GramProvider& train_provider, const std::vector<int>& train_labels,
    const std::vector<std::vector<std::size_t>>& folds,
    const kernels::Samples& test_samples, const std::vector<int>& test_labels,
    double t, std::size_t s, std::size_t n, const std::vector<double>& c_values,
    const std::vector<std::uint64_t>& seeds, const std::vector<ClassicalGrid>& baseline,
    std::size_t workers = 1) {
  {
    std::vector<std::uint64_t> sorted(seeds);
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
      throw std::invalid_argument("random_pauli_study: seeds must be distinct");
  }
  StudyReport report;
  for (std::uint64_t seed : seeds) {
    QuantumGrid grid;
    grid.n = n;
    grid.t_values = {t};
    grid.s_values = {s};
    grid.c_values = c_values;
    grid.pauli_seeds = {seed};
    GridSpec spec;
    spec.quantum = grid;
    const auto configs = spec.enumerate();
    const CvReport cv = run_cv(train_provider, train_labels, folds, configs);
    const ConfigResult& chosen = cv.results[cv.chosen];
    const TestReport test = evaluate_test(train_provider, train_labels, test_samples,
                                          test_labels, chosen.config, workers);
    report.rows.push_back({seed, chosen.config.penalty, chosen.mean_train,
                           chosen.mean_val, test.accuracy});
  }
  if (!baseline.empty()) {
    GridSpec spec;
    spec.classical = baseline;
    const auto configs = spec.enumerate();
    const CvReport cv = run_cv(train_provider, train_labels, folds, configs);
    const ConfigResult& chosen = cv.results[cv.chosen];
    const TestReport test = evaluate_test(train_provider, train_labels, test_samples,
                                          test_labels, chosen.config, workers);
    report.best_classical_test_accuracy = test.accuracy;
    report.best_classical_config = chosen.config;
  }
  return report;
}

}  // namespace qksvm::experiment
