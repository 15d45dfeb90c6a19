#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "qksvm/dataset.hpp"
#include "qksvm/rng.hpp"

namespace qksvm::data {

// Two linearly separable clusters: the first coordinate of class +1 lies in
// [margin/2, margin/2 + 1] and of class -1 in [-margin/2 - 1, -margin/2];
// remaining coordinates are uniform in [-1, 1].
inline Dataset make_blobs(std::size_t per_class, std::size_t dim, double margin,
                          std::uint64_t seed) {
  if (per_class < 1 || dim < 1)
    throw std::invalid_argument("make_blobs: need per_class >= 1 and dim >= 1");
  if (!(margin > 0.0)) throw std::invalid_argument("make_blobs: margin must be positive");
  Rng rng(seed);
  Dataset ds;
  for (int label : {+1, -1}) {
    for (std::size_t i = 0; i < per_class; ++i) {
      std::vector<double> x(dim);
      const double offset = margin / 2.0 + uniform_real(rng, 0.0, 1.0);
      x[0] = label > 0 ? offset : -offset;
      for (std::size_t k = 1; k < dim; ++k) x[k] = uniform_real(rng, -1.0, 1.0);
      ds.samples.push_back(std::move(x));
      ds.labels.push_back(label);
    }
  }
  return ds;
}

// The four points (+-1, +-1) labeled by the product of signs.
inline Dataset make_xor() {
  Dataset ds;
  for (double a : {1.0, -1.0})
    for (double b : {1.0, -1.0}) {
      ds.samples.push_back({a, b});
      ds.labels.push_back(a * b > 0 ? 1 : -1);
    }
  return ds;
}

// Labels from the sign of cos(pi * freq * x_1); points whose cosine magnitude
// falls under 0.05 are resampled so the classes keep a margin.
inline Dataset make_cosine(std::size_t count, std::size_t dim, double freq,
                           std::uint64_t seed) {
  if (count < 1 || dim < 1)
    throw std::invalid_argument("make_cosine: need count >= 1 and dim >= 1");
  Rng rng(seed);
  Dataset ds;
  while (ds.samples.size() < count) {
    std::vector<double> x(dim);
    for (std::size_t k = 0; k < dim; ++k) x[k] = uniform_real(rng, -1.0, 1.0);
    const double c = std::cos(std::numbers::pi * freq * x[0]);
    if (std::fabs(c) < 0.05) continue;
    ds.samples.push_back(std::move(x));
    ds.labels.push_back(c > 0.0 ? 1 : -1);
  }
  return ds;
}

// CSV with the default label mapping (+1 -> "1", -1 -> "0") and feature
// columns f1..fd; optional leading '#' comment lines.
inline void write_dataset_csv(const std::filesystem::path& path, const Dataset& ds,
                              const std::string& header_comment = "") {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_dataset_csv: cannot open " + path.string());
  if (!header_comment.empty()) out << "# " << header_comment << "\n";
  const std::size_t d = ds.dim();
  for (std::size_t k = 0; k < d; ++k) out << "f" << (k + 1) << ",";
  out << "label\n";
  char buf[32];
  for (std::size_t i = 0; i < ds.size(); ++i) {
    for (std::size_t k = 0; k < d; ++k) {
      std::snprintf(buf, sizeof buf, "%.17g", ds.samples[i][k]);
      out << buf << ",";
    }
    out << (ds.labels[i] > 0 ? "1" : "0") << "\n";
  }
  if (!out) throw std::runtime_error("write_dataset_csv: write failed");
}

}  // namespace qksvm::data
