#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <utility>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

namespace hcm::data {

// n samples of (x in R^input_width, y in R^target_width), row-major.
// `meta` records the generator and its parameters.
struct LabeledSet {
  std::size_t input_width = 0;
  std::size_t target_width = 0;
  std::vector<double> inputs;
  std::vector<double> targets;
  nlohmann::json meta = nlohmann::json::object();

  LabeledSet() = default;
  LabeledSet(std::size_t in_width, std::size_t out_width)
      : input_width(in_width), target_width(out_width) {}

  std::size_t size() const { return input_width == 0 ? 0 : inputs.size() / input_width; }
  std::span<const double> input(std::size_t i) const {
    return {inputs.data() + i * input_width, input_width};
  }
  std::span<const double> target(std::size_t i) const {
    return {targets.data() + i * target_width, target_width};
  }
  std::span<double> input(std::size_t i) { return {inputs.data() + i * input_width, input_width}; }
  std::span<double> target(std::size_t i) {
    return {targets.data() + i * target_width, target_width};
  }
  void add(std::span<const double> x, std::span<const double> y);
  LabeledSet subset(std::span<const std::size_t> rows) const;
};

// Heteroscedastic noise for the cubic toy: std ramps linearly from sigma_lo
// at noise_lo to sigma_hi at noise_hi and is exactly zero outside.
struct CubicSpec {
  double x_lo = -4.0;
  double x_hi = 4.0;
  double noise_lo = -2.0;
  double noise_hi = 2.0;
  double sigma_lo = 0.0;
  double sigma_hi = 20.0;
};

double cubic_noise_std(double x, const CubicSpec& spec = {});

// x ~ U[x_lo, x_hi], y = x^3 + N(0, sigma(x)^2). Scalar targets.
LabeledSet gen_cubic(std::size_t n, std::uint64_t seed, const CubicSpec& spec = {});

// Two interleaving half circles: class 0 on (cos t, sin t), class 1 on
// (1 - cos t, 0.5 - sin t), t evenly spaced on [0, pi], plus isotropic
// jitter. One-hot targets in R^2; first n/2 rows are class 0.
LabeledSet gen_two_moons(std::size_t n, double noise_std, std::uint64_t seed);

// k isotropic Gaussian clusters whose centers sit on a circle in the first
// two input coordinates with adjacent centers `spacing` apart. The OOD
// cluster is centered on the circle's axis, `ood_height` above its plane
// (input_width >= 3 needed when ood_height != 0).
struct BlobSpec {
  int classes = 4;
  double cluster_std = 1.0;
  double spacing = 10.0;
  double ood_height = 0.0;
  double ood_std = 1.0;
};

std::vector<std::vector<double>> blob_centers(const BlobSpec& spec, std::size_t input_width);
std::vector<double> blob_ood_center(const BlobSpec& spec, std::size_t input_width);

// Returns (in-distribution set with one-hot targets, OOD set). OOD rows carry
// all-zero targets, which are never decomposed. Throws DomainError if the
// OOD center is closer than 6 cluster stds to an ID center.
std::pair<LabeledSet, LabeledSet> gen_blobs_ood(std::size_t n_id, std::size_t n_ood,
                                                std::size_t input_width, std::uint64_t seed,
                                                const BlobSpec& spec = {});

// Smooth vector-valued regression with strictly positive targets:
// y_j = 3 + sin(pi (x_{j} + 0.5 x_{j+1})) + N(0, noise_std^2), indices mod
// input_width, x ~ U[-1, 1]^input_width.
LabeledSet gen_smooth_regression(std::size_t n, std::size_t input_width,
                                 std::size_t target_width, double noise_std,
                                 std::uint64_t seed);

// x' = x + a eps with a ~ U(0, a_max), eps ~ N(0, I); targets untouched.
// meta["amplitudes"] lists a per row.
LabeledSet perturb_inputs(const LabeledSet& set, double a_max, std::uint64_t seed);

struct PairwiseMixup {
  double alpha = 1.0;
};
struct DirichletMixup {
  std::size_t k = 20;
  double alpha = 0.5;
};
using MixupMode = std::variant<PairwiseMixup, DirichletMixup>;

// Convex combination of the listed rows with the given weights.
void mix_samples(const LabeledSet& set, std::span<const std::size_t> rows,
                 std::span<const double> weights, std::span<double> x_out,
                 std::span<double> y_out);

// Same-size batch of mixed samples. Pairwise: partner from a random
// permutation, lambda ~ Beta(alpha, alpha). Dirichlet: k distinct rows,
// weights ~ Dir(alpha 1_k).
LabeledSet mixup(const LabeledSet& batch, const MixupMode& mode, std::uint64_t seed);

std::vector<double> one_hot(std::size_t label, std::size_t classes);

// Random partition into consecutive fractions (e.g. 0.8, 0.1, 0.1).
std::vector<LabeledSet> split(const LabeledSet& set, std::span<const double> fractions,
                              std::uint64_t seed);

// Columns x0..x{n-1}, y0..y{m-1}; meta goes to `<path>.meta.json`.
void csv_write(const LabeledSet& set, const std::filesystem::path& path);
// Reads the sidecar when present. Throws DataError on malformed content.
LabeledSet csv_read(const std::filesystem::path& path);
std::filesystem::path meta_path(const std::filesystem::path& csv_path);

}  // namespace hcm::data
