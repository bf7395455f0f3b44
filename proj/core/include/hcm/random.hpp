#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <vector>

namespace hcm {

using Rng = std::mt19937_64;

// splitmix64 finalizer; maps (seed, stream) to a well-mixed child seed so
// independent consumers never share an engine state.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Symmetric Dirichlet(alpha * 1_k) draw via normalized gammas.
inline std::vector<double> sample_dirichlet(Rng& rng, std::size_t k,
                                            double alpha) {
  std::gamma_distribution<double> gamma(alpha, 1.0);
  std::vector<double> w(k);
  double total = 0.0;
  for (auto& v : w) {
    v = gamma(rng);
    total += v;
  }
  if (total <= 0.0) {
    // Every gamma underflowed (tiny alpha); fall back to a vertex.
    std::uniform_int_distribution<std::size_t> pick(0, k - 1);
    std::fill(w.begin(), w.end(), 0.0);
    w[pick(rng)] = 1.0;
    return w;
  }
  for (auto& v : w) v /= total;
  return w;
}

inline double sample_beta(Rng& rng, double a, double b) {
  std::gamma_distribution<double> ga(a, 1.0);
  std::gamma_distribution<double> gb(b, 1.0);
  const double x = ga(rng);
  const double y = gb(rng);
  if (x + y <= 0.0) return 0.5;
  return x / (x + y);
}

}  // namespace hcm
