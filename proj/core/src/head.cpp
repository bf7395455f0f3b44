#include "hcm/head.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <random>
#include <string>
#include <thread>

#include "hcm/error.hpp"
#include "hcm/random.hpp"

namespace hcm {

double l2_norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

double HcmOutput::direction_norm() const { return l2_norm(direction); }

TargetDecomposition decompose(std::span<const double> y) {
  if (y.size() < 2)
    throw DomainError("decompose: dimension must be >= 2 (embed scalars first)");
  for (double v : y)
    if (!std::isfinite(v)) throw DomainError("decompose: non-finite target");
  const double r = l2_norm(y);
  if (r == 0.0) throw DomainError("decompose: zero target has no direction");
  TargetDecomposition t;
  t.magnitude = r;
  t.direction.resize(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) t.direction[i] = y[i] / r;
  return t;
}

std::array<double, 2> embed_scalar(double y) { return {y, y}; }

double readback_scalar(std::span<const double> y_hat) {
  if (y_hat.empty()) return 0.0;
  return std::accumulate(y_hat.begin(), y_hat.end(), 0.0) /
         static_cast<double>(y_hat.size());
}

std::vector<double> recompose(const HcmOutput& out) {
  std::vector<double> y(out.direction.size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = out.magnitude * out.direction[i];
  return y;
}

double uncertainty_score(const HcmOutput& out, ScoreDiagnostics* diag) {
  if (out.magnitude < 0.0 && diag != nullptr) ++diag->negative_magnitude;
  return std::abs(out.magnitude) * std::abs(out.direction_norm() - 1.0);
}

double sigma_hat_sq(const HcmOutput& out) {
  const auto dim = out.dim();
  if (dim < 2) throw DomainError("sigma_hat_sq: dimension must be >= 2");
  const double norm = out.direction_norm();
  const double r = std::abs(out.magnitude);
  return uncertainty_score(out) * r * (1.0 + norm) / static_cast<double>(dim - 1);
}

ErrorTriple error_triple(const TargetDecomposition& target, const HcmOutput& out) {
  if (target.dim() != out.dim())
    throw DimensionError("error_triple: target and prediction dimensions differ");
  ErrorTriple e;
  const auto dim = target.dim();
  e.e_y.resize(dim);
  e.e_d.resize(dim);
  for (std::size_t i = 0; i < dim; ++i) {
    e.e_d[i] = out.direction[i] - target.direction[i];
    e.e_y[i] = out.magnitude * out.direction[i] - target.magnitude * target.direction[i];
  }
  e.e_r = out.magnitude - target.magnitude;
  const double denom = out.magnitude * l2_norm(e.e_d);
  if (denom > 0.0) e.epsilon = std::abs(e.e_r) / denom;
  return e;
}

LowerBoundReport prediction_error_bound(const TargetDecomposition& target,
                                        const HcmOutput& out) {
  const ErrorTriple e = error_triple(target, out);
  LowerBoundReport rep;
  rep.u = uncertainty_score(out);
  rep.epsilon = e.epsilon;
  rep.e_y_norm = l2_norm(e.e_y);
  const double dir = out.magnitude * l2_norm(e.e_d);
  rep.sandwich_lower = dir - std::abs(e.e_r);
  rep.sandwich_upper = dir + std::abs(e.e_r);
  if (e.epsilon && *e.epsilon < 1.0) rep.lower = rep.u * (1.0 - *e.epsilon);
  return rep;
}

double noise_tracking_remainder(double g_norm, int dim, double sigma) {
  const double d = dim;
  const double s2 = sigma * sigma;
  return (d + 2.0) * (d + 4.0) * s2 * s2 / ((d - 1.0) * g_norm * g_norm);
}

unsigned default_thread_count() {
  if (const char* env = std::getenv("HCM_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

namespace {

constexpr std::uint64_t kOracleChunks = 64;

struct ChunkSums {
  double sq_norm = 0.0;
  std::vector<double> direction;
  std::uint64_t count = 0;
};

ChunkSums run_chunk(double g_norm, int dim, double sigma, std::uint64_t count,
                    std::uint64_t seed) {
  ChunkSums s;
  s.direction.assign(static_cast<std::size_t>(dim), 0.0);
  s.count = count;
  // By rotation invariance g can sit on the first axis.
  std::vector<double> y(static_cast<std::size_t>(dim));
  if (sigma == 0.0) {
    s.sq_norm = static_cast<double>(count) * g_norm * g_norm;
    s.direction[0] = static_cast<double>(count);
    return s;
  }
  Rng rng(seed);
  std::normal_distribution<double> noise(0.0, sigma);
  for (std::uint64_t n = 0; n < count; ++n) {
    for (auto& v : y) v = noise(rng);
    y[0] += g_norm;
    double sq = 0.0;
    for (double v : y) sq += v * v;
    const double norm = std::sqrt(sq);
    s.sq_norm += sq;
    if (norm > 0.0)
      for (std::size_t i = 0; i < y.size(); ++i) s.direction[i] += y[i] / norm;
  }
  return s;
}

double estimate_from(double sq_norm_mean, std::span<const double> direction_mean, int dim) {
  double dn2 = 0.0;
  for (double v : direction_mean) dn2 += v * v;
  return sq_norm_mean * std::abs(1.0 - dn2) / static_cast<double>(dim - 1);
}

}  // namespace

NoiseTrackingEstimate noise_tracking_oracle(double g_norm, int dim, double sigma,
                                            std::uint64_t n_samples, std::uint64_t seed,
                                            unsigned threads) {
  if (n_samples == 0) throw DomainError("noise_tracking_oracle: n_samples must be > 0");
  if (dim < 2) throw DomainError("noise_tracking_oracle: dimension must be >= 2");
  if (!(g_norm > 0.0)) throw DomainError("noise_tracking_oracle: ||g|| must be > 0");
  if (sigma < 0.0) throw DomainError("noise_tracking_oracle: sigma must be >= 0");

  const std::uint64_t chunks = std::min<std::uint64_t>(kOracleChunks, n_samples);
  std::vector<ChunkSums> sums(chunks);
  auto chunk_size = [&](std::uint64_t c) {
    return n_samples / chunks + (c < n_samples % chunks ? 1 : 0);
  };

  if (threads == 0) threads = default_thread_count();
  threads = static_cast<unsigned>(std::min<std::uint64_t>(threads, chunks));
  if (threads <= 1) {
    for (std::uint64_t c = 0; c < chunks; ++c)
      sums[c] = run_chunk(g_norm, dim, sigma, chunk_size(c), derive_seed(seed, c));
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < threads; ++w) {
      pool.emplace_back([&, w] {
        for (std::uint64_t c = w; c < chunks; c += threads)
          sums[c] = run_chunk(g_norm, dim, sigma, chunk_size(c), derive_seed(seed, c));
      });
    }
    for (auto& t : pool) t.join();
  }

  // Fixed-order reduction.
  const double n = static_cast<double>(n_samples);
  double sq_total = 0.0;
  std::vector<double> dir_total(static_cast<std::size_t>(dim), 0.0);
  std::vector<double> chunk_estimates;
  std::vector<double> chunk_sq_means;
  for (const auto& s : sums) {
    sq_total += s.sq_norm;
    for (std::size_t i = 0; i < dir_total.size(); ++i) dir_total[i] += s.direction[i];
    const double m = static_cast<double>(s.count);
    std::vector<double> dm(s.direction.size());
    for (std::size_t i = 0; i < dm.size(); ++i) dm[i] = s.direction[i] / m;
    chunk_estimates.push_back(estimate_from(s.sq_norm / m, dm, dim));
    chunk_sq_means.push_back(s.sq_norm / m);
  }

  NoiseTrackingEstimate est;
  est.mean_sq_norm = sq_total / n;
  for (auto& v : dir_total) v /= n;
  est.mean_direction_norm = l2_norm(dir_total);
  est.sigma_hat_sq = sigma == 0.0 ? 0.0 : estimate_from(est.mean_sq_norm, dir_total, dim);
  est.remainder_bound = noise_tracking_remainder(g_norm, dim, sigma);

  auto batch_se = [&](const std::vector<double>& xs) {
    if (xs.size() < 2) return 0.0;
    const double k = static_cast<double>(xs.size());
    const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / k;
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / (k - 1.0) / k);
  };
  est.standard_error = batch_se(chunk_estimates);
  est.mean_sq_norm_standard_error = batch_se(chunk_sq_means);
  return est;
}

}  // namespace hcm
