#include <cstdio>
#include <cstdlib>
#include <exception>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qksvm/runner.hpp"

namespace {

struct CommonArgs {
  std::string config_path;
  std::vector<std::string> overrides;
  std::string output_dir;
  bool verbose = false;
};

void add_common(CLI::App* cmd, CommonArgs& args, const std::string& keys) {
  cmd->add_option("-c,--config", args.config_path, "experiment config file (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("-s,--set", args.overrides,
                  "override a config key, e.g. --set split.seed=7 (repeatable)");
  cmd->add_option("-o,--output-dir", args.output_dir,
                  "output directory (default: config output_dir, or $QKSVM_OUT_DIR)");
  cmd->add_flag("-v,--verbose", args.verbose, "chatty progress output");
  cmd->footer("Config keys consumed: " + keys);
}

qksvm::config::ExperimentConfig load(const CommonArgs& args) {
  std::vector<std::string> overrides = args.overrides;
  if (!args.output_dir.empty()) overrides.push_back("output_dir=" + args.output_dir);
  auto cfg = qksvm::config::load_config(args.config_path, overrides);
  if (args.output_dir.empty() && cfg.output_dir == "out") {
    if (const char* env = std::getenv("QKSVM_OUT_DIR")) {
      cfg.output_dir = env;
      cfg.resolved["output_dir"] = cfg.output_dir;
    }
  }
  return cfg;
}

constexpr const char* kDataKeys =
    "dataset.{path,label_column,label_map,id_column} | synth.* | "
    "split.{test_fraction,folds,seed} | undersample.{enabled,seed} | "
    "output_dir | workers";

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantum-kernel SVM toolkit: Trotterized Pauli-Hamiltonian encoding "
               "circuits, kernel matrices, soft-margin SVMs, and the full "
               "cross-validation experiment protocol."};
  app.require_subcommand(1);

  CommonArgs kernel_args, grid_args, eval_args, bound_args, study_args, synth_args;

  auto* cmd_kernel = app.add_subcommand(
      "kernel", "compute the training Gram matrix, write CSV + binary cache");
  add_common(cmd_kernel, kernel_args, std::string(kDataKeys) + " | model.*");

  auto* cmd_grid = app.add_subcommand(
      "gridsearch", "stratified k-fold CV over the hyperparameter grid");
  add_common(cmd_grid, grid_args,
             std::string(kDataKeys) + " | quantum_grid.{n,t,s,C,pauli_seeds} | "
                                      "classical_grids[].{family,C,gamma,degree,coef0}");

  auto* cmd_eval = app.add_subcommand(
      "eval", "retrain an explicit model and score the held-out test set");
  add_common(cmd_eval, eval_args, std::string(kDataKeys) + " | model.*");

  auto* cmd_bound = app.add_subcommand(
      "bound", "evaluate the generalization-error bound for a quantum model");
  add_common(cmd_bound, bound_args,
             std::string(kDataKeys) + " | model.* | bound.delta");

  auto* cmd_study = app.add_subcommand(
      "study", "repeated random-Pauli-sample experiment at fixed (t, s, n)");
  add_common(cmd_study, study_args,
             std::string(kDataKeys) + " | study.{t,s,n,C,seeds} | classical_grids[]");

  auto* cmd_synth = app.add_subcommand("synth", "generate a synthetic dataset CSV");
  add_common(cmd_synth, synth_args,
             "synth.{kind,per_class,count,dim,margin,freq,seed,path} | output_dir");

  CLI11_PARSE(app, argc, argv);

  try {
    if (cmd_kernel->parsed()) {
      const auto cfg = load(kernel_args);
      const auto hash = qksvm::runner::run_kernel(cfg);
      std::printf("gram content hash: %016llx\n",
                  static_cast<unsigned long long>(hash));
    } else if (cmd_grid->parsed()) {
      const auto cfg = load(grid_args);
      const auto report = qksvm::runner::run_gridsearch(cfg);
      const auto& chosen = report.results[report.chosen];
      std::printf("chosen: %s  mean_val=%.4f mean_train=%.4f\n",
                  chosen.config.describe().c_str(), chosen.mean_val,
                  chosen.mean_train);
    } else if (cmd_eval->parsed()) {
      const auto cfg = load(eval_args);
      const auto report = qksvm::runner::run_eval(cfg);
      std::printf("test accuracy: %.4f  (tp=%zu tn=%zu fp=%zu fn=%zu)\n",
                  report.accuracy, report.true_positive, report.true_negative,
                  report.false_positive, report.false_negative);
    } else if (cmd_bound->parsed()) {
      const auto cfg = load(bound_args);
      const auto report = qksvm::runner::run_bound(cfg);
      std::printf("bound=%.6g  alpha_norm_sq=%.6g kappa=%.6g t=%g M=%zu delta=%g\n",
                  report.bound, report.alpha_norm_sq, report.kappa,
                  report.evolution_time, report.sample_count, report.delta);
    } else if (cmd_study->parsed()) {
      const auto cfg = load(study_args);
      const auto report = qksvm::runner::run_study(cfg);
      std::printf("study rows: %zu\n", report.rows.size());
      for (const auto& row : report.rows)
        std::printf("  seed=%llu C=%g val=%.4f test=%.4f\n",
                    static_cast<unsigned long long>(row.pauli_seed),
                    row.chosen_penalty, row.mean_val_accuracy, row.test_accuracy);
    } else if (cmd_synth->parsed()) {
      const auto cfg = load(synth_args);
      const auto path = qksvm::runner::run_synth(cfg);
      std::printf("wrote %s\n", path.string().c_str());
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "qksvm: error: %s\n", e.what());
    return 1;
  }
  return 0;
}
