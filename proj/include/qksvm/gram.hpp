#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "qksvm/encoding.hpp"

namespace qksvm::kernels {

// Dense M x M Gram matrix, row-major, with a short description of the
// generating kernel.
struct KernelMatrix {
  std::size_t size = 0;
  std::vector<double> entries;  // size * size, row-major
  std::string kind;

  double at(std::size_t i, std::size_t j) const { return entries[i * size + j]; }
  double& at(std::size_t i, std::size_t j) { return entries[i * size + j]; }
};

// Rectangular L x M cross-kernel block (rows: test, columns: train).
struct CrossKernel {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> entries;

  double at(std::size_t l, std::size_t i) const { return entries[l * cols + i]; }
  double& at(std::size_t l, std::size_t i) { return entries[l * cols + i]; }
};

enum class KernelFamily { Linear, Rbf, Polynomial };

struct ClassicalKernelParams {
  KernelFamily family = KernelFamily::Linear;
  double gamma = 1.0;   // rbf / polynomial
  int degree = 3;       // polynomial
  double coef0 = 0.0;   // polynomial

  void validate() const {
    if (family != KernelFamily::Linear && (!(gamma > 0.0) || !std::isfinite(gamma)))
      throw std::invalid_argument("ClassicalKernelParams: gamma must be positive");
    if (family == KernelFamily::Polynomial && degree < 1)
      throw std::invalid_argument("ClassicalKernelParams: degree must be >= 1");
  }

  std::string describe() const {
    char buf[128];
    switch (family) {
      case KernelFamily::Linear:
        return "linear";
      case KernelFamily::Rbf:
        std::snprintf(buf, sizeof buf, "rbf gamma=%.17g", gamma);
        return buf;
      case KernelFamily::Polynomial:
        std::snprintf(buf, sizeof buf, "poly gamma=%.17g degree=%d coef0=%.17g",
                      gamma, degree, coef0);
        return buf;
    }
    return "?";
  }
};

using Samples = std::vector<std::vector<double>>;

namespace detail {

inline void check_samples(const Samples& samples, const char* who) {
  if (samples.empty())
    throw std::invalid_argument(std::string(who) + ": empty sample set");
  const std::size_t d = samples.front().size();
  for (const auto& s : samples)
    if (s.size() != d)
      throw std::invalid_argument(std::string(who) + ": inconsistent vector lengths");
}

// Run fn(i) for i in [0, count) over `workers` threads by contiguous chunks.
// Each index writes disjoint output, so the result does not depend on the
// worker count.
template <typename Fn>
void parallel_for(std::size_t count, std::size_t workers, Fn&& fn) {
  if (workers <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  workers = std::min(workers, count);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  const std::size_t chunk = (count + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t lo = w * chunk;
    const std::size_t hi = std::min(count, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &fn] {
      for (std::size_t i = lo; i < hi; ++i) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

inline std::vector<qsim::StateVector> encode_all(const Samples& samples,
                                                 const qsim::EncodingSpec& spec,
                                                 std::size_t workers) {
  std::vector<qsim::StateVector> states;
  states.reserve(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i)
    states.push_back(qsim::StateVector::zero_state(spec.num_qubits));
  parallel_for(samples.size(), workers, [&](std::size_t i) {
    states[i] = qsim::encode(samples[i], spec);
  });
  return states;
}

}  // namespace detail

// Quantum Gram matrix: each sample is encoded once, the diagonal is set to 1
// without computation, and each off-diagonal pair is evaluated once and
// mirrored.
inline KernelMatrix quantum_gram(const Samples& samples,
                                 const qsim::EncodingSpec& spec,
                                 std::size_t workers = 1) {
  detail::check_samples(samples, "quantum_gram");
  if (samples.front().size() != spec.dim())
    throw std::invalid_argument("quantum_gram: sample length != d");
  const std::size_t m = samples.size();
  const auto states = detail::encode_all(samples, spec, workers);
  KernelMatrix gram;
  gram.size = m;
  gram.entries.assign(m * m, 0.0);
  gram.kind = "quantum n=" + std::to_string(spec.num_qubits) +
              " t=" + std::to_string(spec.evolution_time) +
              " s=" + std::to_string(spec.trotter_steps);
  detail::parallel_for(m, workers, [&](std::size_t i) {
    gram.at(i, i) = 1.0;
    for (std::size_t j = i + 1; j < m; ++j) {
      const double k = qsim::detail::clamp_kernel(qsim::fidelity(states[i], states[j]));
      gram.at(i, j) = k;
    }
  });
  // Mirror after the fill so row-parallel writes never race.
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i + 1; j < m; ++j) gram.at(j, i) = gram.at(i, j);
  return gram;
}

inline CrossKernel quantum_cross_gram(const Samples& train, const Samples& test,
                                      const qsim::EncodingSpec& spec,
                                      std::size_t workers = 1) {
  detail::check_samples(train, "quantum_cross_gram");
  detail::check_samples(test, "quantum_cross_gram");
  if (train.front().size() != spec.dim() || test.front().size() != spec.dim())
    throw std::invalid_argument("quantum_cross_gram: sample length != d");
  const auto train_states = detail::encode_all(train, spec, workers);
  const auto test_states = detail::encode_all(test, spec, workers);
  CrossKernel cross;
  cross.rows = test.size();
  cross.cols = train.size();
  cross.entries.assign(cross.rows * cross.cols, 0.0);
  detail::parallel_for(cross.rows, workers, [&](std::size_t l) {
    for (std::size_t i = 0; i < cross.cols; ++i)
      cross.at(l, i) =
          qsim::detail::clamp_kernel(qsim::fidelity(test_states[l], train_states[i]));
  });
  return cross;
}

inline double classical_kernel_value(std::span<const double> a,
                                     std::span<const double> b,
                                     const ClassicalKernelParams& params) {
  if (a.size() != b.size())
    throw std::invalid_argument("classical_kernel_value: length mismatch");
  switch (params.family) {
    case KernelFamily::Linear: {
      double dot = 0.0;
      for (std::size_t k = 0; k < a.size(); ++k) dot += a[k] * b[k];
      return dot;
    }
    case KernelFamily::Rbf: {
      double d2 = 0.0;
      for (std::size_t k = 0; k < a.size(); ++k) {
        const double diff = a[k] - b[k];
        d2 += diff * diff;
      }
      return std::exp(-params.gamma * d2);
    }
    case KernelFamily::Polynomial: {
      double dot = 0.0;
      for (std::size_t k = 0; k < a.size(); ++k) dot += a[k] * b[k];
      return std::pow(params.gamma * dot + params.coef0, params.degree);
    }
  }
  throw std::logic_error("classical_kernel_value: invalid family");
}

inline CrossKernel classical_gram(const Samples& samples_a, const Samples& samples_b,
                                  const ClassicalKernelParams& params) {
  detail::check_samples(samples_a, "classical_gram");
  detail::check_samples(samples_b, "classical_gram");
  params.validate();
  CrossKernel out;
  out.rows = samples_a.size();
  out.cols = samples_b.size();
  out.entries.resize(out.rows * out.cols);
  for (std::size_t i = 0; i < out.rows; ++i)
    for (std::size_t j = 0; j < out.cols; ++j)
      out.at(i, j) = classical_kernel_value(samples_a[i], samples_b[j], params);
  return out;
}

// Square classical Gram with symmetric fill (each unordered pair computed once).
inline KernelMatrix classical_gram_square(const Samples& samples,
                                          const ClassicalKernelParams& params) {
  detail::check_samples(samples, "classical_gram_square");
  params.validate();
  const std::size_t m = samples.size();
  KernelMatrix gram;
  gram.size = m;
  gram.entries.assign(m * m, 0.0);
  gram.kind = params.describe();
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i; j < m; ++j) {
      const double k = classical_kernel_value(samples[i], samples[j], params);
      gram.at(i, j) = k;
      gram.at(j, i) = k;
    }
  return gram;
}

// ---- serialization and caching ----------------------------------------------

inline void write_gram_csv(const std::filesystem::path& path, const KernelMatrix& gram,
                           const std::string& header_comment = "") {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_gram_csv: cannot open " + path.string());
  if (!header_comment.empty()) out << "# " << header_comment << "\n";
  char buf[32];
  for (std::size_t i = 0; i < gram.size; ++i) {
    for (std::size_t j = 0; j < gram.size; ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", gram.at(i, j));
      out << buf << (j + 1 < gram.size ? "," : "\n");
    }
  }
  if (!out) throw std::runtime_error("write_gram_csv: write failed for " + path.string());
}

namespace detail {

// FNV-1a over raw bytes; stable across platforms for our little-endian targets.
struct Fnv1a {
  std::uint64_t h = 1469598103934665603ull;
  void bytes(const void* data, std::size_t len) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
      h ^= p[i];
      h *= 1099511628211ull;
    }
  }
  void f64(double v) { bytes(&v, sizeof v); }
  void str(const std::string& s) { bytes(s.data(), s.size()); }
};

}  // namespace detail

// Content hash of (samples, kernel descriptor); keys the binary Gram cache.
inline std::uint64_t gram_content_hash(const Samples& samples,
                                       const std::string& kernel_descriptor) {
  detail::Fnv1a h;
  h.str(kernel_descriptor);
  std::uint64_t m = samples.size();
  h.bytes(&m, sizeof m);
  for (const auto& s : samples) {
    std::uint64_t d = s.size();
    h.bytes(&d, sizeof d);
    for (double v : s) h.f64(v);
  }
  return h.h;
}

inline std::filesystem::path gram_cache_path(const std::filesystem::path& cache_dir,
                                             std::uint64_t hash) {
  char name[32];
  std::snprintf(name, sizeof name, "%016llx.gram",
                static_cast<unsigned long long>(hash));
  return cache_dir / name;
}

inline bool gram_cache_load(const std::filesystem::path& cache_dir, std::uint64_t hash,
                            KernelMatrix& out) {
  const auto path = gram_cache_path(cache_dir, hash);
  std::ifstream in(path, std::ios::binary);
  if (!in) return false;
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, "QKGRAM1\0", 8) != 0) return false;
  std::uint64_t m = 0;
  in.read(reinterpret_cast<char*>(&m), sizeof m);
  out.size = m;
  out.entries.resize(m * m);
  in.read(reinterpret_cast<char*>(out.entries.data()),
          static_cast<std::streamsize>(out.entries.size() * sizeof(double)));
  return static_cast<bool>(in);
}

inline void gram_cache_store(const std::filesystem::path& cache_dir, std::uint64_t hash,
                             const KernelMatrix& gram) {
  std::filesystem::create_directories(cache_dir);
  const auto path = gram_cache_path(cache_dir, hash);
  // Write to a temp name and rename so concurrent readers never see a partial
  // file.
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw std::runtime_error("gram_cache_store: cannot open " + tmp);
    out.write("QKGRAM1\0", 8);
    std::uint64_t m = gram.size;
    out.write(reinterpret_cast<const char*>(&m), sizeof m);
    out.write(reinterpret_cast<const char*>(gram.entries.data()),
              static_cast<std::streamsize>(gram.entries.size() * sizeof(double)));
    if (!out) throw std::runtime_error("gram_cache_store: write failed");
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace qksvm::kernels
