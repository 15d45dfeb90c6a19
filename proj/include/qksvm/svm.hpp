#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "qksvm/gram.hpp"

namespace qksvm::svm {

struct SingleClassError : std::invalid_argument {
  SingleClassError()
      : std::invalid_argument("solve_dual: labels contain a single class; "
                              "the equality constraint forces alpha = 0") {}
};

struct NonconvergenceError : std::runtime_error {
  explicit NonconvergenceError(double violation)
      : std::runtime_error("solve_dual: iteration cap reached with KKT violation " +
                           std::to_string(violation)) {}
};

constexpr double kSupportThreshold = 1e-8;

struct SvmModel {
  std::vector<double> alphas;     // each in [0, C]
  double bias = 0.0;
  double penalty = 0.0;           // C
  std::vector<int> labels;        // +/-1
  std::vector<std::size_t> support_indices;  // { i : alpha_i > 1e-8 }
  kernels::Samples training_samples;         // optional; needed for prediction on raw inputs
  std::string kernel_descriptor;
};

namespace detail {

// KKT sets for the dual of Eq-style box/equality constrained problems:
// I_up holds indices whose alpha can move up along y, I_low down.
inline bool in_up_set(double alpha, int y, double c) {
  return (y > 0 && alpha < c) || (y < 0 && alpha > 0.0);
}
inline bool in_low_set(double alpha, int y, double c) {
  return (y < 0 && alpha < c) || (y > 0 && alpha > 0.0);
}

}  // namespace detail

// Maximal KKT violation m(alpha) - M(alpha) of the current iterate; <= 0 at
// the optimum.
inline double kkt_violation(const kernels::KernelMatrix& kernel,
                            std::span<const int> labels,
                            std::span<const double> alphas, double c) {
  const std::size_t m = labels.size();
  double up = -std::numeric_limits<double>::infinity();
  double low = std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < m; ++t) {
    double g = -1.0;
    for (std::size_t s = 0; s < m; ++s)
      g += labels[t] * labels[s] * kernel.at(t, s) * alphas[s];
    const double v = -labels[t] * g;
    if (detail::in_up_set(alphas[t], labels[t], c)) up = std::max(up, v);
    if (detail::in_low_set(alphas[t], labels[t], c)) low = std::min(low, v);
  }
  return up - low;
}

// KKT bias: average of y_i - sum_j alpha_j y_j K_ij over free support vectors;
// midpoint of the feasible interval from bound vectors when no free SV exists.
inline double compute_bias(std::span<const double> alphas,
                           const kernels::KernelMatrix& kernel,
                           std::span<const int> labels, double c) {
  const std::size_t m = labels.size();
  if (kernel.size != m || alphas.size() != m)
    throw std::invalid_argument("compute_bias: shape mismatch");
  bool any_support = false;
  for (std::size_t i = 0; i < m; ++i)
    if (alphas[i] > kSupportThreshold) any_support = true;
  if (!any_support)
    throw std::invalid_argument("compute_bias: no support vectors (degenerate model)");

  std::vector<double> margin(m, 0.0);  // sum_j alpha_j y_j K_ij
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j)
      margin[i] += alphas[j] * labels[j] * kernel.at(i, j);

  double free_sum = 0.0;
  std::size_t free_count = 0;
  for (std::size_t i = 0; i < m; ++i) {
    if (alphas[i] > kSupportThreshold && alphas[i] < c - kSupportThreshold) {
      free_sum += labels[i] - margin[i];
      ++free_count;
    }
  }
  if (free_count > 0) return free_sum / static_cast<double>(free_count);

  // All SVs at the box bound: y_i (margin_i + b) <= 1 for alpha_i = C and
  // >= 1 for alpha_i = 0 bracket b.
  double lower = -std::numeric_limits<double>::infinity();
  double upper = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < m; ++i) {
    const double boundary = labels[i] - margin[i];  // b making y_i f(x_i) = 1
    const bool at_zero = alphas[i] <= kSupportThreshold;
    if ((at_zero && labels[i] > 0) || (!at_zero && labels[i] < 0))
      lower = std::max(lower, boundary);
    else
      upper = std::min(upper, boundary);
  }
  return 0.5 * (lower + upper);
}

// Two-variable working-set coordinate descent on the soft-margin dual:
//   min 1/2 sum_ij a_i a_j y_i y_j K_ij - sum_i a_i,  0 <= a <= C,  y.a = 0.
// Pair selection is most-violating (max over I_up, min over I_low of -y_t g_t),
// lowest index among ties, stopping when the violation drops to `tol`.
// Subproblems with nonpositive curvature step to the box boundary.
inline SvmModel solve_dual(const kernels::KernelMatrix& kernel,
                           std::span<const int> labels, double c,
                           double tol = 1e-6,
                           std::size_t max_pair_updates = 10'000'000) {
  const std::size_t m = labels.size();
  if (kernel.size != m)
    throw std::invalid_argument("solve_dual: kernel size != label count");
  if (m == 0) throw std::invalid_argument("solve_dual: empty problem");
  if (!(c > 0.0)) throw std::invalid_argument("solve_dual: C must be positive");
  bool has_pos = false, has_neg = false;
  for (int y : labels) {
    if (y == 1) has_pos = true;
    else if (y == -1) has_neg = true;
    else throw std::invalid_argument("solve_dual: labels must be +/-1");
  }
  if (!has_pos || !has_neg) throw SingleClassError();

  std::vector<double> alpha(m, 0.0);
  std::vector<double> grad(m, -1.0);  // g_t = sum_s Q_ts a_s - 1

  double last_violation = std::numeric_limits<double>::infinity();
  std::size_t iter = 0;
  for (;; ++iter) {
    // Most-violating pair.
    std::size_t i = m, j = m;
    double up = -std::numeric_limits<double>::infinity();
    double low = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < m; ++t) {
      const double v = -labels[t] * grad[t];
      if (detail::in_up_set(alpha[t], labels[t], c) && v > up) {
        up = v;
        i = t;
      }
      if (detail::in_low_set(alpha[t], labels[t], c) && v < low) {
        low = v;
        j = t;
      }
    }
    last_violation = up - low;
    if (i == m || j == m || last_violation <= tol) break;
    if (iter >= max_pair_updates) throw NonconvergenceError(last_violation);

    // Optimal step along (a_i += y_i * lambda, a_j -= y_j * lambda); the
    // curvature along this direction is K_ii + K_jj - 2 K_ij.
    const double curvature = kernel.at(i, i) + kernel.at(j, j) - 2.0 * kernel.at(i, j);
    double lambda;
    const double slope = labels[i] * grad[i] - labels[j] * grad[j];  // df/dlambda at 0
    if (curvature > 1e-12) {
      lambda = -slope / curvature;
    } else {
      // Flat or concave direction: move as far as the box allows.
      lambda = (slope < 0.0) ? std::numeric_limits<double>::infinity()
                             : -std::numeric_limits<double>::infinity();
    }
    // Box limits for both coordinates.
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    if (labels[i] > 0) {
      lo = std::max(lo, -alpha[i]);
      hi = std::min(hi, c - alpha[i]);
    } else {
      lo = std::max(lo, alpha[i] - c);
      hi = std::min(hi, alpha[i]);
    }
    if (labels[j] > 0) {
      lo = std::max(lo, alpha[j] - c);
      hi = std::min(hi, alpha[j]);
    } else {
      lo = std::max(lo, -alpha[j]);
      hi = std::min(hi, c - alpha[j]);
    }
    lambda = std::min(std::max(lambda, lo), hi);
    if (lambda == 0.0) break;  // boxed in; no progress possible on this pair

    const double delta_i = labels[i] * lambda;
    const double delta_j = -labels[j] * lambda;
    alpha[i] += delta_i;
    alpha[j] += delta_j;
    // Snap to exact bounds so the up/low set membership stays crisp.
    if (alpha[i] < 0.0) alpha[i] = 0.0;
    if (alpha[i] > c) alpha[i] = c;
    if (alpha[j] < 0.0) alpha[j] = 0.0;
    if (alpha[j] > c) alpha[j] = c;

    for (std::size_t t = 0; t < m; ++t)
      grad[t] += labels[t] * (labels[i] * kernel.at(t, i) * delta_i +
                              labels[j] * kernel.at(t, j) * delta_j);
  }

  SvmModel model;
  model.alphas = std::move(alpha);
  model.penalty = c;
  model.labels.assign(labels.begin(), labels.end());
  for (std::size_t t = 0; t < m; ++t)
    if (model.alphas[t] > kSupportThreshold) model.support_indices.push_back(t);
  model.bias = model.support_indices.empty()
                   ? 0.0
                   : compute_bias(model.alphas, kernel, labels, c);
  model.kernel_descriptor = kernel.kind;
  return model;
}

// Eq.-style decision value sum_i alpha_i y_i K(x, x_i) + b for one test row.
inline double decision_value(const SvmModel& model,
                             std::span<const double> cross_kernel_row) {
  if (cross_kernel_row.size() != model.alphas.size())
    throw std::invalid_argument("decision_value: row length != M");
  double acc = model.bias;
  for (std::size_t i = 0; i < model.alphas.size(); ++i)
    acc += model.alphas[i] * model.labels[i] * cross_kernel_row[i];
  return acc;
}

// sign with the tie sign(0) = +1.
inline int predict(const SvmModel& model, std::span<const double> cross_kernel_row) {
  return decision_value(model, cross_kernel_row) >= 0.0 ? 1 : -1;
}

inline std::vector<double> decision_values(const SvmModel& model,
                                           const kernels::CrossKernel& cross) {
  if (cross.cols != model.alphas.size())
    throw std::invalid_argument("decision_values: cross kernel cols != M");
  std::vector<double> out(cross.rows);
  for (std::size_t l = 0; l < cross.rows; ++l)
    out[l] = decision_value(
        model, std::span<const double>(cross.entries).subspan(l * cross.cols, cross.cols));
  return out;
}

inline std::vector<int> predict_all(const SvmModel& model,
                                    const kernels::CrossKernel& cross) {
  std::vector<int> labels;
  for (double v : decision_values(model, cross)) labels.push_back(v >= 0.0 ? 1 : -1);
  return labels;
}

// Dual objective value; used for solver comparisons.
inline double dual_objective(const kernels::KernelMatrix& kernel,
                             std::span<const int> labels,
                             std::span<const double> alphas) {
  const std::size_t m = labels.size();
  double quad = 0.0, lin = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    lin += alphas[i];
    for (std::size_t j = 0; j < m; ++j)
      quad += alphas[i] * alphas[j] * labels[i] * labels[j] * kernel.at(i, j);
  }
  return 0.5 * quad - lin;
}

// ---- model serialization ----------------------------------------------------
// Versioned plain text, 17 significant digits, exact round-trip.

inline void save_model(const std::filesystem::path& path, const SvmModel& model) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_model: cannot open " + path.string());
  char buf[64];
  const std::size_t m = model.alphas.size();
  out << "qksvm-model v1\n";
  out << "M " << m << "\n";
  std::snprintf(buf, sizeof buf, "%.17g", model.penalty);
  out << "C " << buf << "\n";
  std::snprintf(buf, sizeof buf, "%.17g", model.bias);
  out << "b " << buf << "\n";
  out << "kernel " << model.kernel_descriptor << "\n";
  const bool with_samples = model.training_samples.size() == m;
  for (std::size_t i = 0; i < m; ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", model.alphas[i]);
    out << buf << " " << model.labels[i];
    if (with_samples) {
      out << " " << model.training_samples[i].size();
      for (double v : model.training_samples[i]) {
        std::snprintf(buf, sizeof buf, " %.17g", v);
        out << buf;
      }
    } else {
      out << " 0";
    }
    out << "\n";
  }
  if (!out) throw std::runtime_error("save_model: write failed for " + path.string());
}

inline SvmModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_model: cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != "qksvm-model v1")
    throw std::runtime_error("load_model: bad header in " + path.string());
  SvmModel model;
  std::size_t m = 0;
  std::string key;
  in >> key >> m;
  if (key != "M") throw std::runtime_error("load_model: expected M");
  in >> key >> model.penalty;
  if (key != "C") throw std::runtime_error("load_model: expected C");
  in >> key >> model.bias;
  if (key != "b") throw std::runtime_error("load_model: expected b");
  in >> key;
  if (key != "kernel") throw std::runtime_error("load_model: expected kernel");
  std::getline(in, line);
  model.kernel_descriptor = line.empty() ? "" : line.substr(1);
  model.alphas.resize(m);
  model.labels.resize(m);
  model.training_samples.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    std::size_t d = 0;
    if (!(in >> model.alphas[i] >> model.labels[i] >> d))
      throw std::runtime_error("load_model: truncated sample line");
    model.training_samples[i].resize(d);
    for (std::size_t k = 0; k < d; ++k)
      if (!(in >> model.training_samples[i][k]))
        throw std::runtime_error("load_model: truncated descriptor vector");
    if (model.alphas[i] > kSupportThreshold) model.support_indices.push_back(i);
  }
  if (m > 0 && model.training_samples[0].empty()) model.training_samples.clear();
  return model;
}

}  // namespace qksvm::svm
