#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "qksvm/rng.hpp"

namespace qksvm::data {

// M descriptor vectors with labels in {+1, -1}.
struct Dataset {
  std::vector<std::vector<double>> samples;
  std::vector<int> labels;
  std::vector<std::string> ids;  // optional, empty or size M

  std::size_t size() const { return samples.size(); }
  std::size_t dim() const { return samples.empty() ? 0 : samples.front().size(); }
};

struct CsvSchema {
  std::string label_column = "label";
  std::map<std::string, int> label_map = {{"1", 1}, {"0", -1}};
  std::optional<std::string> id_column;
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

}  // namespace detail

// UTF-8, header row, comma separated, decimal-point floats. Lines starting
// with '#' are comments (our own writers emit a config header that way).
inline Dataset load_csv(const std::filesystem::path& path, const CsvSchema& schema) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_csv: cannot open " + path.string());
  std::string line;
  do {
    if (!std::getline(in, line))
      throw std::runtime_error("load_csv: missing header row in " + path.string());
  } while (!line.empty() && line.front() == '#');
  if (!line.empty() && line.back() == '\r') line.pop_back();

  const auto header = detail::split_csv_line(line);
  std::size_t label_col = header.size();
  std::size_t id_col = header.size();
  std::vector<std::size_t> feature_cols;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c] == schema.label_column) {
      label_col = c;
    } else if (schema.id_column && header[c] == *schema.id_column) {
      id_col = c;
    } else {
      feature_cols.push_back(c);
    }
  }
  if (label_col == header.size())
    throw std::runtime_error("load_csv: label column '" + schema.label_column +
                             "' not found in " + path.string());
  if (schema.id_column && id_col == header.size())
    throw std::runtime_error("load_csv: id column '" + *schema.id_column +
                             "' not found in " + path.string());
  if (feature_cols.empty())
    throw std::runtime_error("load_csv: no feature columns in " + path.string());

  Dataset ds;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const auto cells = detail::split_csv_line(line);
    if (cells.size() != header.size())
      throw std::runtime_error("load_csv: row " + std::to_string(row) + " has " +
                               std::to_string(cells.size()) + " cells, expected " +
                               std::to_string(header.size()));
    std::vector<double> x;
    x.reserve(feature_cols.size());
    for (std::size_t c : feature_cols) {
      try {
        std::size_t pos = 0;
        const double v = std::stod(cells[c], &pos);
        if (pos != cells[c].size()) throw std::invalid_argument("trailing junk");
        if (!std::isfinite(v)) throw std::invalid_argument("non-finite");
        x.push_back(v);
      } catch (const std::exception&) {
        throw std::runtime_error("load_csv: unparsable numeric at row " +
                                 std::to_string(row) + ", column '" + header[c] + "'");
      }
    }
    const auto it = schema.label_map.find(cells[label_col]);
    if (it == schema.label_map.end())
      throw std::runtime_error("load_csv: unknown label value '" + cells[label_col] +
                               "' at row " + std::to_string(row));
    ds.samples.push_back(std::move(x));
    ds.labels.push_back(it->second);
    if (id_col < header.size()) ds.ids.push_back(cells[id_col]);
  }
  if (ds.samples.empty())
    throw std::runtime_error("load_csv: no data rows in " + path.string());
  return ds;
}

// ---- standardization --------------------------------------------------------

struct StandardizationParams {
  std::vector<double> means;
  std::vector<double> stds;  // population standard deviation
};

// Per-column mean and population std over the selected rows only.
inline StandardizationParams fit_standardizer(const Dataset& ds,
                                              const std::vector<std::size_t>& on) {
  if (on.empty()) throw std::invalid_argument("fit_standardizer: empty index set");
  const std::size_t d = ds.dim();
  StandardizationParams params;
  params.means.assign(d, 0.0);
  params.stds.assign(d, 0.0);
  for (std::size_t i : on)
    for (std::size_t k = 0; k < d; ++k) params.means[k] += ds.samples.at(i)[k];
  for (std::size_t k = 0; k < d; ++k) params.means[k] /= static_cast<double>(on.size());
  for (std::size_t i : on)
    for (std::size_t k = 0; k < d; ++k) {
      const double diff = ds.samples[i][k] - params.means[k];
      params.stds[k] += diff * diff;
    }
  for (std::size_t k = 0; k < d; ++k)
    params.stds[k] = std::sqrt(params.stds[k] / static_cast<double>(on.size()));
  return params;
}

// z-score per column; zero-variance columns map to 0.
inline Dataset apply_standardizer(const Dataset& ds, const StandardizationParams& params) {
  if (params.means.size() != ds.dim())
    throw std::invalid_argument("apply_standardizer: dimension mismatch");
  Dataset out = ds;
  for (auto& x : out.samples)
    for (std::size_t k = 0; k < x.size(); ++k)
      x[k] = params.stds[k] == 0.0 ? 0.0 : (x[k] - params.means[k]) / params.stds[k];
  return out;
}

// ---- balancing, splits, folds -----------------------------------------------

// Drops majority-class members uniformly at random until both classes among
// `on` have exactly min(class counts); the surviving indices keep their
// original relative order.
inline std::vector<std::size_t> undersample(const Dataset& ds,
                                            const std::vector<std::size_t>& on,
                                            std::uint64_t seed) {
  std::vector<std::size_t> pos, neg;
  for (std::size_t i : on) (ds.labels.at(i) > 0 ? pos : neg).push_back(i);
  if (pos.empty() || neg.empty())
    throw std::invalid_argument("undersample: both classes must be present");
  if (pos.size() == neg.size()) return on;

  auto& majority = pos.size() > neg.size() ? pos : neg;
  const std::size_t keep = std::min(pos.size(), neg.size());
  Rng rng(seed);
  shuffle_in_place(rng, majority);
  majority.resize(keep);
  std::sort(majority.begin(), majority.end());

  std::vector<std::size_t> kept(pos);
  kept.insert(kept.end(), neg.begin(), neg.end());
  std::sort(kept.begin(), kept.end());
  // Restore the order of `on` (which need not be sorted).
  std::vector<std::size_t> out;
  out.reserve(kept.size());
  for (std::size_t i : on)
    if (std::binary_search(kept.begin(), kept.end(), i)) out.push_back(i);
  return out;
}

struct SplitPlan {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
  std::vector<std::vector<std::size_t>> folds;  // partition of train (possibly a subset after undersampling)
  std::uint64_t seed = 0;
};

// Per-class shuffled allocation; test size per class = round(count * fraction).
inline SplitPlan stratified_split(const Dataset& ds, double test_fraction,
                                  std::uint64_t seed) {
  if (!(test_fraction > 0.0) || !(test_fraction < 1.0))
    throw std::invalid_argument("stratified_split: test_fraction must be in (0, 1)");
  std::vector<std::size_t> pos, neg;
  for (std::size_t i = 0; i < ds.size(); ++i)
    (ds.labels[i] > 0 ? pos : neg).push_back(i);
  if (pos.size() < 2 || neg.size() < 2)
    throw std::invalid_argument("stratified_split: each class needs >= 2 members");

  SplitPlan plan;
  plan.seed = seed;
  Rng rng(seed);
  for (auto* cls : {&pos, &neg}) {
    shuffle_in_place(rng, *cls);
    const auto test_count = static_cast<std::size_t>(
        std::llround(static_cast<double>(cls->size()) * test_fraction));
    for (std::size_t k = 0; k < cls->size(); ++k)
      (k < test_count ? plan.test : plan.train).push_back((*cls)[k]);
  }
  std::sort(plan.train.begin(), plan.train.end());
  std::sort(plan.test.begin(), plan.test.end());
  return plan;
}

// k folds over the given training indices; per-class counts differ by at most
// one across folds.
inline std::vector<std::vector<std::size_t>> stratified_folds(
    const std::vector<std::size_t>& train_indices, const std::vector<int>& labels,
    std::size_t k, std::uint64_t seed) {
  if (k < 2) throw std::invalid_argument("stratified_folds: need k >= 2");
  std::vector<std::size_t> pos, neg;
  for (std::size_t i : train_indices) (labels.at(i) > 0 ? pos : neg).push_back(i);
  if (pos.size() < k || neg.size() < k)
    throw std::invalid_argument("stratified_folds: each class needs >= k members");

  std::vector<std::vector<std::size_t>> folds(k);
  Rng rng(seed);
  for (auto* cls : {&pos, &neg}) {
    shuffle_in_place(rng, *cls);
    for (std::size_t idx = 0; idx < cls->size(); ++idx)
      folds[idx % k].push_back((*cls)[idx]);
  }
  for (auto& fold : folds) std::sort(fold.begin(), fold.end());
  return folds;
}

// ---- split plan serialization (exact experiment replay) ---------------------

inline void save_split_plan(const std::filesystem::path& path, const SplitPlan& plan) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_split_plan: cannot open " + path.string());
  out << "qksvm-split v1\n";
  out << "seed " << plan.seed << "\n";
  out << "train";
  for (std::size_t i : plan.train) out << " " << i;
  out << "\ntest";
  for (std::size_t i : plan.test) out << " " << i;
  out << "\nfolds " << plan.folds.size() << "\n";
  for (const auto& fold : plan.folds) {
    out << "fold";
    for (std::size_t i : fold) out << " " << i;
    out << "\n";
  }
  if (!out) throw std::runtime_error("save_split_plan: write failed");
}

inline SplitPlan load_split_plan(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_split_plan: cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != "qksvm-split v1")
    throw std::runtime_error("load_split_plan: bad header in " + path.string());
  SplitPlan plan;
  auto read_indices = [](const std::string& text, const std::string& tag) {
    std::stringstream ss(text);
    std::string word;
    ss >> word;
    if (word != tag)
      throw std::runtime_error("load_split_plan: expected '" + tag + "'");
    std::vector<std::size_t> out;
    std::size_t v;
    while (ss >> v) out.push_back(v);
    return out;
  };
  std::getline(in, line);
  {
    std::stringstream ss(line);
    std::string word;
    ss >> word >> plan.seed;
    if (word != "seed") throw std::runtime_error("load_split_plan: expected 'seed'");
  }
  std::getline(in, line);
  plan.train = read_indices(line, "train");
  std::getline(in, line);
  plan.test = read_indices(line, "test");
  std::getline(in, line);
  std::size_t k = 0;
  {
    std::stringstream ss(line);
    std::string word;
    ss >> word >> k;
    if (word != "folds") throw std::runtime_error("load_split_plan: expected 'folds'");
  }
  for (std::size_t f = 0; f < k; ++f) {
    if (!std::getline(in, line))
      throw std::runtime_error("load_split_plan: truncated fold list");
    plan.folds.push_back(read_indices(line, "fold"));
  }
  return plan;
}

}  // namespace qksvm::data
