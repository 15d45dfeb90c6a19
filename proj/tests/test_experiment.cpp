#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>

#include <Eigen/Dense>

#include "qksvm/experiment.hpp"
#include "qksvm/synth.hpp"

using namespace qksvm;
using experiment::GramProvider;
using experiment::GridSpec;
using experiment::ModelConfig;

namespace {

struct Blobs {
  kernels::Samples samples;
  std::vector<int> labels;
  std::vector<std::vector<std::size_t>> folds;
};

Blobs blob_problem(std::size_t per_class, std::size_t k) {
  const auto ds = data::make_blobs(per_class, 2, 2.0, 21);
  std::vector<std::size_t> all(ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) all[i] = i;
  Blobs out;
  out.samples = ds.samples;
  out.labels = ds.labels;
  out.folds = data::stratified_folds(all, ds.labels, k, 5);
  return out;
}

GridSpec linear_only_grid(std::vector<double> c_values) {
  experiment::ClassicalGrid grid;
  grid.family = kernels::KernelFamily::Linear;
  grid.c_values = std::move(c_values);
  GridSpec spec;
  spec.classical = {grid};
  return spec;
}

}  // namespace

TEST_CASE("sample_pauli_strings determinism and shape") {
  const auto a = experiment::sample_pauli_strings(40, 6, 123);
  const auto b = experiment::sample_pauli_strings(40, 6, 123);
  REQUIRE(a.size() == 40);
  for (std::size_t j = 0; j < 40; ++j) {
    CHECK(a[j].num_qubits() == 6);
    CHECK(a[j] == b[j]);
  }
  const auto c = experiment::sample_pauli_strings(40, 6, 124);
  bool all_same = true;
  for (std::size_t j = 0; j < 40; ++j)
    if (!(a[j] == c[j])) all_same = false;
  CHECK_FALSE(all_same);
  CHECK_THROWS_AS(experiment::sample_pauli_strings(0, 1, 0), std::invalid_argument);
}

TEST_CASE("sample_pauli_strings symbol frequencies are uniform") {
  const std::size_t d = 10000;
  const auto strings = experiment::sample_pauli_strings(d, 1, 777);
  std::size_t counts[4] = {0, 0, 0, 0};
  for (const auto& p : strings) counts[static_cast<int>(p.symbol(0))]++;
  // Binomial(10^4, 1/4): mean 2500, sigma ~ 43.3; require within 5 sigma.
  const double sigma = std::sqrt(d * 0.25 * 0.75);
  for (std::size_t k = 0; k < 4; ++k)
    CHECK(std::fabs(static_cast<double>(counts[k]) - 2500.0) < 5.0 * sigma);
}

TEST_CASE("grid enumeration is deterministic and rejects empty grids") {
  GridSpec empty;
  CHECK_THROWS_AS(empty.enumerate(), std::invalid_argument);

  experiment::QuantumGrid q;
  q.t_values = {0.1, 0.2};
  q.s_values = {1};
  q.c_values = {1.0, 2.0};
  q.pauli_seeds = {5};
  GridSpec spec;
  spec.quantum = q;
  const auto configs = spec.enumerate();
  REQUIRE(configs.size() == 4);
  CHECK(configs[0].quantum.t == 0.1);
  CHECK(configs[0].penalty == 1.0);
  CHECK(configs[1].penalty == 2.0);
  CHECK(configs[2].quantum.t == 0.2);
}

TEST_CASE("GramProvider memoizes and uses the disk cache") {
  const auto blobs = blob_problem(6, 2);
  const auto dir = std::filesystem::temp_directory_path() / "qksvm_provider_test";
  std::filesystem::remove_all(dir);

  ModelConfig mc;
  mc.is_quantum = true;
  mc.quantum = {2, 0.5, 2, 9};
  {
    GramProvider provider(blobs.samples, 1, dir);
    const auto& g1 = provider.full_gram(mc);
    const auto& g2 = provider.full_gram(mc);
    CHECK(&g1 == &g2);
  }
  // A fresh provider reads the cached matrix back.
  GramProvider provider2(blobs.samples, 1, dir);
  const auto& cached = provider2.full_gram(mc);
  GramProvider provider3(blobs.samples, 1, std::nullopt);
  const auto& fresh = provider3.full_gram(mc);
  CHECK(cached.entries == fresh.entries);
  std::filesystem::remove_all(dir);
}

TEST_CASE("run_cv on a one-configuration grid") {
  auto blobs = blob_problem(10, 5);
  GramProvider provider(blobs.samples, 1);
  const auto configs = linear_only_grid({1.0}).enumerate();
  const auto report = experiment::run_cv(provider, blobs.labels, blobs.folds, configs);
  REQUIRE(report.results.size() == 1);
  CHECK(report.chosen == 0);
  // Separable blobs: perfect validation accuracy.
  CHECK(report.results[0].mean_val == doctest::Approx(1.0));
  CHECK(report.results[0].mean_train == doctest::Approx(1.0));
}

TEST_CASE("duplicated configurations report identical metrics") {
  auto blobs = blob_problem(8, 4);
  GramProvider provider(blobs.samples, 1);
  const auto configs = linear_only_grid({1.0, 1.0}).enumerate();
  const auto report = experiment::run_cv(provider, blobs.labels, blobs.folds, configs);
  REQUIRE(report.results.size() == 2);
  CHECK(report.results[0].mean_val == report.results[1].mean_val);
  CHECK(report.results[0].mean_train == report.results[1].mean_train);
  CHECK(report.chosen == 0);  // ties keep the lowest index
}

TEST_CASE("grid permutation cannot change the chosen metrics") {
  auto blobs = blob_problem(8, 4);
  GramProvider provider(blobs.samples, 1);
  auto configs = linear_only_grid({1e-6, 1.0, 10.0}).enumerate();
  const auto report = experiment::run_cv(provider, blobs.labels, blobs.folds, configs);

  std::reverse(configs.begin(), configs.end());
  const auto reversed = experiment::run_cv(provider, blobs.labels, blobs.folds, configs);
  CHECK(report.results[report.chosen].mean_val ==
        reversed.results[reversed.chosen].mean_val);
  CHECK(report.results[report.chosen].mean_train ==
        reversed.results[reversed.chosen].mean_train);
}

TEST_CASE("run_cv rejects folds missing a class") {
  auto blobs = blob_problem(6, 3);
  // Corrupt one fold to a single class.
  std::vector<std::vector<std::size_t>> folds = blobs.folds;
  std::vector<std::size_t> pos_only;
  for (std::size_t i : folds[0])
    if (blobs.labels[i] > 0) pos_only.push_back(i);
  folds[0] = pos_only;
  GramProvider provider(blobs.samples, 1);
  CHECK_THROWS_AS(experiment::run_cv(provider, blobs.labels, folds,
                                     linear_only_grid({1.0}).enumerate()),
                  std::invalid_argument);
}

TEST_CASE("evaluate_test on separable data") {
  auto blobs = blob_problem(10, 5);
  GramProvider provider(blobs.samples, 1);
  ModelConfig mc = linear_only_grid({1.0}).enumerate()[0];
  const auto report = experiment::evaluate_test(provider, blobs.labels, blobs.samples,
                                                blobs.labels, mc);
  CHECK(report.accuracy == doctest::Approx(1.0));
  CHECK(report.true_positive + report.true_negative + report.false_positive +
            report.false_negative ==
        blobs.samples.size());
  // accuracy + error rate = 1 exactly
  const double error_rate =
      static_cast<double>(report.false_positive + report.false_negative) /
      static_cast<double>(blobs.samples.size());
  CHECK(report.accuracy + error_rate == 1.0);
}

TEST_CASE("generalization bound edge cases") {
  const auto paulis = experiment::sample_pauli_strings(3, 2, 55);
  const qsim::EncodingSpec spec(2, paulis, 0.5, 1);
  kernels::Samples samples = {{1.0, 0.0, 0.5}, {0.0, 1.0, -0.5},
                              {0.3, 0.3, 0.3}, {-1.0, 0.2, 0.1}};

  // delta = 1: multiplier collapses to 1.
  const std::vector<double> alphas = {1.0, 1.0, 1.0, 1.0};
  const auto r1 = experiment::generalization_bound(alphas, samples, spec, 1.0);
  CHECK(r1.bound == doctest::Approx(8.0 *
                                    (r1.alpha_norm_sq + r1.kappa * 0.25) / 2.0)
                        .epsilon(1e-12));

  // alpha = 0: bound 0.
  const std::vector<double> zeros(4, 0.0);
  const auto r0 = experiment::generalization_bound(zeros, samples, spec, 0.5);
  CHECK(r0.bound == 0.0);

  CHECK_THROWS_AS(experiment::generalization_bound(alphas, samples, spec, 0.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(experiment::generalization_bound(alphas, samples, spec, 1.5),
                  std::invalid_argument);
}

TEST_CASE("kappa vanishes for all-off-diagonal Pauli strings") {
  const std::vector<qsim::PauliString> paulis = {qsim::PauliString::parse("XI"),
                                                 qsim::PauliString::parse("YZ")};
  const qsim::EncodingSpec spec(2, paulis, 1.0, 1);
  kernels::Samples samples = {{1.0, 2.0}, {3.0, -1.0}, {0.5, 0.5}, {2.0, 2.0}};
  const std::vector<double> alphas = {1.0, 1.0, 1.0, 1.0};
  const auto report = experiment::generalization_bound(alphas, samples, spec, 1.0);
  CHECK(report.kappa == 0.0);
  // 8 * ||alpha||^2 / sqrt(4) = 8 * 4 / 2 = 16.
  CHECK(report.bound == doctest::Approx(16.0).epsilon(1e-12));

  const auto with_delta = experiment::generalization_bound(alphas, samples, spec, 0.1);
  const double mult = 1.0 + 0.5 * std::sqrt(std::log(10.0) / 2.0);
  CHECK(with_delta.bound == doctest::Approx(16.0 * mult).epsilon(1e-12));
}

TEST_CASE("bound is monotone nondecreasing in t and kappa is a PSD-like form") {
  Rng rng(211);
  const auto paulis = experiment::sample_pauli_strings(4, 3, 66);
  kernels::Samples samples;
  std::vector<double> alphas;
  for (int i = 0; i < 6; ++i) {
    std::vector<double> x(4);
    for (auto& v : x) v = uniform_real(rng, -2.0, 2.0);
    samples.push_back(std::move(x));
    alphas.push_back(uniform_real(rng, 0.0, 2.0));
  }
  double prev = -1.0;
  for (double t : {0.05, 0.1, 0.3, 0.7, 1.5}) {
    const qsim::EncodingSpec spec(3, paulis, t, 1);
    const auto report = experiment::generalization_bound(alphas, samples, spec, 0.3);
    CHECK(report.bound >= prev);
    CHECK(report.kappa >= 0.0);
    prev = report.bound;

    // Quadratic-form oracle for kappa.
    const std::size_t m = samples.size();
    Eigen::MatrixXd b(m, m);
    Eigen::VectorXd av(m);
    for (std::size_t i = 0; i < m; ++i) {
      av(i) = alphas[i];
      for (std::size_t j = 0; j < m; ++j) {
        const double hi = qsim::hamiltonian_expectation_zero(samples[i], spec);
        const double hj = qsim::hamiltonian_expectation_zero(samples[j], spec);
        b(i, j) = (hi - hj) * (hi - hj);
      }
    }
    CHECK(report.kappa == doctest::Approx(av.transpose() * b * av).epsilon(1e-10));
  }
}

TEST_CASE("random Pauli study is deterministic per seed") {
  auto blobs = blob_problem(8, 4);
  GramProvider provider(blobs.samples, 1);
  const std::vector<std::uint64_t> seeds = {3, 8};
  experiment::ClassicalGrid baseline;
  baseline.family = kernels::KernelFamily::Linear;
  baseline.c_values = {1.0};

  const auto run1 = experiment::random_pauli_study(
      provider, blobs.labels, blobs.folds, blobs.samples, blobs.labels, 0.4, 2, 2,
      {0.1, 1.0}, seeds, {baseline});
  REQUIRE(run1.rows.size() == 2);
  const auto run2 = experiment::random_pauli_study(
      provider, blobs.labels, blobs.folds, blobs.samples, blobs.labels, 0.4, 2, 2,
      {0.1, 1.0}, seeds, {baseline});
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(run1.rows[i].test_accuracy == run2.rows[i].test_accuracy);
    CHECK(run1.rows[i].mean_val_accuracy == run2.rows[i].mean_val_accuracy);
    CHECK(run1.rows[i].chosen_penalty == run2.rows[i].chosen_penalty);
  }
  CHECK(run1.best_classical_test_accuracy == doctest::Approx(1.0));

  CHECK_THROWS_AS(experiment::random_pauli_study(provider, blobs.labels, blobs.folds,
                                                 blobs.samples, blobs.labels, 0.4, 2, 2,
                                                 {1.0}, {3, 3}, {}),
                  std::invalid_argument);
}
