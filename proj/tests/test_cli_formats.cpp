#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>

#include "qksvm/runner.hpp"

using namespace qksvm;
using config::json;

namespace {

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  return std::string((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
}

std::filesystem::path fresh_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

// Small separable problem every runner test can share.
json base_config(const std::filesystem::path& out_dir) {
  json root;
  root["synth"] = {{"kind", "blobs"}, {"per_class", 8}, {"dim", 2},
                   {"margin", 2.0},   {"seed", 11}};
  root["output_dir"] = out_dir.string();
  root["split"] = {{"test_fraction", 0.25}, {"folds", 2}, {"seed", 7}};
  root["classical_grids"] = json::array(
      {{{"family", "linear"}, {"C", json::array({1.0, 10.0})}}});
  return root;
}

}  // namespace

TEST_CASE("config override parsing") {
  json root;
  root["split"] = {{"folds", 5}};
  config::detail::apply_override(root, "split.folds=3");
  CHECK(root["split"]["folds"] == 3);
  config::detail::apply_override(root, "synth.kind=blobs");
  CHECK(root["synth"]["kind"] == "blobs");
  config::detail::apply_override(root, "split.test_fraction=0.3");
  CHECK(root["split"]["test_fraction"] == 0.3);
  CHECK_THROWS_AS(config::detail::apply_override(root, "no_equals_sign"),
                  std::runtime_error);
  CHECK_THROWS_AS(config::detail::apply_override(root, "a..b=1"), std::runtime_error);
}

TEST_CASE("parse_config rejects unknown keys") {
  json root;
  root["outptu_dir"] = "typo";
  CHECK_THROWS_AS(config::parse_config(root), std::runtime_error);

  json nested;
  nested["split"] = {{"folds", 5}, {"fraction", 0.2}};  // should be test_fraction
  CHECK_THROWS_AS(config::parse_config(nested), std::runtime_error);

  json model;
  model["model"] = {{"kind", "classical"}, {"family", "rbf"}, {"C", 1.0},
                    {"sigma", 2.0}};
  CHECK_THROWS_AS(config::parse_config(model), std::runtime_error);
}

TEST_CASE("parse_config fills defaults and reads sections") {
  json root = base_config("/tmp/unused");
  root["model"] = {{"kind", "quantum"}, {"n", 3},          {"t", 0.3},
                   {"s", 10},           {"pauli_seed", 4}, {"C", 100.0}};
  root["bound"] = {{"delta", 0.01}};
  root["study"] = {{"t", 0.15}, {"s", 5}, {"n", 4},
                   {"C", json::array({1.0})}, {"seeds", json::array({1, 2})}};
  const auto cfg = config::parse_config(root);
  CHECK(cfg.synth.has_value());
  CHECK(cfg.synth->per_class == 8);
  CHECK(cfg.test_fraction == 0.25);
  CHECK(cfg.folds == 2);
  CHECK(cfg.split_seed == 7);
  CHECK(cfg.undersample_enabled);  // default
  REQUIRE(cfg.model.has_value());
  CHECK(cfg.model->is_quantum);
  CHECK(cfg.model->quantum.n == 3);
  CHECK(cfg.model->quantum.t == 0.3);
  CHECK(cfg.model->penalty == 100.0);
  CHECK(cfg.bound_delta == 0.01);
  CHECK(cfg.study_t == 0.15);
  CHECK(cfg.study_seeds == std::vector<std::uint64_t>{1, 2});
  REQUIRE(cfg.grid.classical.size() == 1);
  CHECK(cfg.grid.classical[0].family == kernels::KernelFamily::Linear);
  CHECK(cfg.grid.classical[0].c_values == std::vector<double>{1.0, 10.0});
  CHECK(cfg.resolved == root);
}

TEST_CASE("parse_config reads the dataset section") {
  json root;
  root["dataset"] = {{"path", "somewhere.csv"},
                     {"label_column", "activity"},
                     {"label_map", {{"active", 1}, {"inactive", -1}}}};
  const auto cfg = config::parse_config(root);
  REQUIRE(cfg.dataset.has_value());
  CHECK(cfg.dataset->path == "somewhere.csv");
  CHECK(cfg.dataset->schema.label_column == "activity");
  CHECK(cfg.dataset->schema.label_map.at("active") == 1);
  CHECK(cfg.dataset->schema.label_map.at("inactive") == -1);
}

TEST_CASE("load_config applies overrides on top of the file") {
  const auto dir = fresh_dir("qksvm_cfg_test");
  const auto path = dir / "config.json";
  {
    std::ofstream out(path);
    out << base_config(dir.string()).dump(2) << "\n";
  }
  const auto cfg = config::load_config(path, {"split.folds=4", "workers=2"});
  CHECK(cfg.folds == 4);
  CHECK(cfg.workers == 2);
  CHECK(cfg.split_seed == 7);  // untouched
  CHECK_THROWS_AS(config::load_config(dir / "missing.json"), std::runtime_error);
  std::filesystem::remove_all(dir);
}

TEST_CASE("prepare builds standardized train/test arrays") {
  const auto dir = fresh_dir("qksvm_prep_test");
  const auto cfg = config::parse_config(base_config(dir));
  const auto prep = runner::prepare(cfg);
  CHECK(prep.train_samples.size() == 12);
  CHECK(prep.test_samples.size() == 4);
  CHECK(prep.fold_positions.size() == 2);

  // Training features are z-scored over the training rows.
  for (std::size_t k = 0; k < 2; ++k) {
    double mean = 0.0;
    for (const auto& row : prep.train_samples) mean += row[k];
    mean /= static_cast<double>(prep.train_samples.size());
    CHECK(std::fabs(mean) < 1e-12);
  }
  // Fold positions index into the train arrays and partition them.
  std::vector<bool> seen(prep.train_samples.size(), false);
  for (const auto& fold : prep.fold_positions)
    for (std::size_t p : fold) {
      REQUIRE(p < seen.size());
      CHECK_FALSE(seen[p]);
      seen[p] = true;
    }
  for (bool b : seen) CHECK(b);
  std::filesystem::remove_all(dir);
}

TEST_CASE("run_kernel writes a commented Gram CSV and a stable hash") {
  const auto dir = fresh_dir("qksvm_runk_test");
  json root = base_config(dir);
  root["model"] = {{"kind", "quantum"}, {"n", 2},          {"t", 0.3},
                   {"s", 2},            {"pauli_seed", 1}, {"C", 1.0}};
  const auto cfg = config::parse_config(root);
  const auto h1 = runner::run_kernel(cfg);
  const std::string csv = slurp(dir / "gram.csv");
  CHECK(csv.rfind("# config: ", 0) == 0);
  const auto h2 = runner::run_kernel(cfg);  // second run hits the cache
  CHECK(h1 == h2);
  CHECK(csv == slurp(dir / "gram.csv"));
  std::filesystem::remove_all(dir);
}

TEST_CASE("run_gridsearch reports are byte-identical across reruns") {
  const auto dir = fresh_dir("qksvm_grid_test");
  const auto cfg = config::parse_config(base_config(dir));
  const auto report1 = runner::run_gridsearch(cfg);
  const std::vector<std::string> names = {"cv_report.json", "cv_table.csv",
                                          "chosen_model.txt", "split_plan.txt"};
  std::vector<std::string> first;
  for (const auto& name : names) first.push_back(slurp(dir / name));

  const auto report2 = runner::run_gridsearch(cfg);
  CHECK(report1.chosen == report2.chosen);
  for (std::size_t i = 0; i < names.size(); ++i)
    CHECK(first[i] == slurp(dir / names[i]));

  // Separable blobs: the chosen configuration validates perfectly.
  CHECK(report1.results[report1.chosen].mean_val == doctest::Approx(1.0));
  std::filesystem::remove_all(dir);
}

TEST_CASE("run_eval scores the held-out test set") {
  const auto dir = fresh_dir("qksvm_eval_test");
  json root = base_config(dir);
  root["model"] = {{"kind", "classical"}, {"family", "linear"}, {"C", 1.0}};
  const auto cfg = config::parse_config(root);
  const auto report = runner::run_eval(cfg);
  CHECK(report.accuracy == doctest::Approx(1.0));
  const json doc = json::parse(slurp(dir / "eval.json"));
  CHECK(doc["test_accuracy"] == report.accuracy);
  CHECK(doc["confusion"]["tp"].get<std::size_t>() == report.true_positive);
  CHECK(doc.contains("resolved_config"));
  std::filesystem::remove_all(dir);
}

TEST_CASE("run_bound needs a quantum model") {
  const auto dir = fresh_dir("qksvm_bound_test");
  json root = base_config(dir);
  root["model"] = {{"kind", "classical"}, {"family", "linear"}, {"C", 1.0}};
  CHECK_THROWS_AS(runner::run_bound(config::parse_config(root)), std::runtime_error);

  root["model"] = {{"kind", "quantum"}, {"n", 2},          {"t", 0.3},
                   {"s", 2},            {"pauli_seed", 1}, {"C", 1.0}};
  root["bound"] = {{"delta", 0.05}};
  const auto report = runner::run_bound(config::parse_config(root));
  CHECK(report.sample_count == 12);
  CHECK(report.delta == 0.05);
  CHECK(report.bound >= 0.0);
  const json doc = json::parse(slurp(dir / "bound.json"));
  CHECK(doc["bound"] == report.bound);
  CHECK(doc["kappa_negative"] == false);
  std::filesystem::remove_all(dir);
}

TEST_CASE("run_study emits deterministic JSON and CSV") {
  const auto dir = fresh_dir("qksvm_study_test");
  json root = base_config(dir);
  root["study"] = {{"t", 0.3}, {"s", 2}, {"n", 2},
                   {"C", json::array({0.1, 1.0})}, {"seeds", json::array({4, 9})}};
  const auto cfg = config::parse_config(root);
  const auto report = runner::run_study(cfg);
  REQUIRE(report.rows.size() == 2);
  const std::string json_first = slurp(dir / "study.json");
  const std::string csv_first = slurp(dir / "study.csv");
  runner::run_study(cfg);
  CHECK(json_first == slurp(dir / "study.json"));
  CHECK(csv_first == slurp(dir / "study.csv"));

  json no_seeds = base_config(dir);
  CHECK_THROWS_AS(runner::run_study(config::parse_config(no_seeds)),
                  std::runtime_error);
  std::filesystem::remove_all(dir);
}

TEST_CASE("run_synth writes a loadable dataset") {
  const auto dir = fresh_dir("qksvm_synth_test");
  json root;
  root["synth"] = {{"kind", "xor"}, {"path", "xor.csv"}};
  root["output_dir"] = dir.string();
  const auto path = runner::run_synth(config::parse_config(root));
  CHECK(path == dir / "xor.csv");
  const auto ds = data::load_csv(path, data::CsvSchema{});
  CHECK(ds.size() == 4);
  std::filesystem::remove_all(dir);
}
