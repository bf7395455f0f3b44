#include "hcm/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <random>
#include <string>

#include "hcm/error.hpp"
#include "hcm/format.hpp"
#include "hcm/random.hpp"

namespace hcm::data {

void LabeledSet::add(std::span<const double> x, std::span<const double> y) {
  if (x.size() != input_width || y.size() != target_width)
    throw DimensionError("LabeledSet::add: row width mismatch");
  inputs.insert(inputs.end(), x.begin(), x.end());
  targets.insert(targets.end(), y.begin(), y.end());
}

LabeledSet LabeledSet::subset(std::span<const std::size_t> rows) const {
  LabeledSet out(input_width, target_width);
  out.meta = meta;
  out.inputs.reserve(rows.size() * input_width);
  out.targets.reserve(rows.size() * target_width);
  for (auto r : rows) out.add(input(r), target(r));
  if (meta.contains("amplitudes")) {
    nlohmann::json amps = nlohmann::json::array();
    for (auto r : rows) amps.push_back(meta["amplitudes"][r]);
    out.meta["amplitudes"] = std::move(amps);
  }
  return out;
}

double cubic_noise_std(double x, const CubicSpec& spec) {
  if (x < spec.noise_lo || x > spec.noise_hi) return 0.0;
  const double t = (x - spec.noise_lo) / (spec.noise_hi - spec.noise_lo);
  return spec.sigma_lo + t * (spec.sigma_hi - spec.sigma_lo);
}

LabeledSet gen_cubic(std::size_t n, std::uint64_t seed, const CubicSpec& spec) {
  if (n == 0) throw DomainError("gen_cubic: n must be >= 1");
  LabeledSet set(1, 1);
  Rng rng(seed);
  std::uniform_real_distribution<double> ux(spec.x_lo, spec.x_hi);
  std::normal_distribution<double> z(0.0, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = ux(rng);
    const double noise = z(rng);
    const double y = x * x * x + cubic_noise_std(x, spec) * noise;
    set.add(std::span(&x, 1), std::span(&y, 1));
  }
  set.meta = {{"generator", "cubic"},
              {"n", n},
              {"seed", seed},
              {"x_lo", spec.x_lo},
              {"x_hi", spec.x_hi},
              {"noise",
               {{"kind", "piecewise_linear_gaussian"},
                {"x_lo", spec.noise_lo},
                {"x_hi", spec.noise_hi},
                {"sigma_lo", spec.sigma_lo},
                {"sigma_hi", spec.sigma_hi}}}};
  return set;
}

LabeledSet gen_two_moons(std::size_t n, double noise_std, std::uint64_t seed) {
  if (n == 0 || n % 2 != 0) throw DomainError("gen_two_moons: n must be positive and even");
  if (noise_std < 0.0) throw DomainError("gen_two_moons: noise_std must be >= 0");
  const std::size_t half = n / 2;
  LabeledSet set(2, 2);
  Rng rng(seed);
  std::normal_distribution<double> z(0.0, 1.0);
  auto angle = [half](std::size_t i) {
    return half == 1 ? 0.0 : std::numbers::pi * static_cast<double>(i) / static_cast<double>(half - 1);
  };
  for (std::size_t c = 0; c < 2; ++c) {
    const auto target = one_hot(c, 2);
    for (std::size_t i = 0; i < half; ++i) {
      const double t = angle(i);
      double x[2];
      if (c == 0) {
        x[0] = std::cos(t);
        x[1] = std::sin(t);
      } else {
        x[0] = 1.0 - std::cos(t);
        x[1] = 0.5 - std::sin(t);
      }
      if (noise_std > 0.0) {
        x[0] += noise_std * z(rng);
        x[1] += noise_std * z(rng);
      }
      set.add(x, target);
    }
  }
  set.meta = {{"generator", "two_moons"}, {"n", n}, {"seed", seed}, {"noise_std", noise_std}};
  return set;
}

std::vector<std::vector<double>> blob_centers(const BlobSpec& spec, std::size_t input_width) {
  if (spec.classes < 2) throw DomainError("blobs: need at least 2 classes");
  if (input_width < 2) throw DomainError("blobs: input width must be >= 2");
  const double radius = spec.spacing / (2.0 * std::sin(std::numbers::pi / spec.classes));
  std::vector<std::vector<double>> centers;
  for (int c = 0; c < spec.classes; ++c) {
    // Offset by half a step so four classes sit on the diagonals.
    const double t = 2.0 * std::numbers::pi * (c + 0.5) / spec.classes;
    std::vector<double> center(input_width, 0.0);
    center[0] = radius * std::cos(t);
    center[1] = radius * std::sin(t);
    centers.push_back(std::move(center));
  }
  return centers;
}

std::vector<double> blob_ood_center(const BlobSpec& spec, std::size_t input_width) {
  std::vector<double> center(input_width, 0.0);
  if (spec.ood_height != 0.0) {
    if (input_width < 3) throw DomainError("blobs: ood_height needs input width >= 3");
    center[2] = spec.ood_height;
  }
  return center;
}

std::pair<LabeledSet, LabeledSet> gen_blobs_ood(std::size_t n_id, std::size_t n_ood,
                                                std::size_t input_width, std::uint64_t seed,
                                                const BlobSpec& spec) {
  if (n_id == 0 || n_ood == 0) throw DomainError("gen_blobs_ood: counts must be >= 1");
  if (!(spec.cluster_std > 0.0) || !(spec.ood_std > 0.0))
    throw DomainError("gen_blobs_ood: cluster stds must be > 0");
  const auto centers = blob_centers(spec, input_width);
  const auto ood = blob_ood_center(spec, input_width);
  for (const auto& c : centers) {
    double d2 = 0.0;
    for (std::size_t i = 0; i < input_width; ++i) d2 += (c[i] - ood[i]) * (c[i] - ood[i]);
    if (std::sqrt(d2) < 6.0 * spec.cluster_std)
      throw DomainError("gen_blobs_ood: OOD center closer than 6 cluster stds to an ID center");
  }

  Rng rng(seed);
  std::normal_distribution<double> z(0.0, 1.0);
  const auto classes = static_cast<std::size_t>(spec.classes);
  LabeledSet id(input_width, classes);
  std::vector<double> x(input_width);
  for (std::size_t i = 0; i < n_id; ++i) {
    const std::size_t c = i % classes;
    for (std::size_t k = 0; k < input_width; ++k) x[k] = centers[c][k] + spec.cluster_std * z(rng);
    id.add(x, one_hot(c, classes));
  }
  LabeledSet out(input_width, classes);
  const std::vector<double> unlabeled(classes, 0.0);
  for (std::size_t i = 0; i < n_ood; ++i) {
    for (std::size_t k = 0; k < input_width; ++k) x[k] = ood[k] + spec.ood_std * z(rng);
    out.add(x, unlabeled);
  }
  nlohmann::json meta{{"generator", "blobs"},
                      {"seed", seed},
                      {"classes", spec.classes},
                      {"cluster_std", spec.cluster_std},
                      {"spacing", spec.spacing},
                      {"ood_height", spec.ood_height},
                      {"ood_std", spec.ood_std},
                      {"input_width", input_width}};
  id.meta = meta;
  id.meta["split"] = "id";
  id.meta["n"] = n_id;
  out.meta = meta;
  out.meta["split"] = "ood";
  out.meta["n"] = n_ood;
  return {std::move(id), std::move(out)};
}

LabeledSet gen_smooth_regression(std::size_t n, std::size_t input_width,
                                 std::size_t target_width, double noise_std,
                                 std::uint64_t seed) {
  if (n == 0 || input_width == 0 || target_width < 2)
    throw DomainError("gen_smooth_regression: need n >= 1, inputs >= 1, targets >= 2");
  LabeledSet set(input_width, target_width);
  Rng rng(seed);
  std::uniform_real_distribution<double> ux(-1.0, 1.0);
  std::normal_distribution<double> z(0.0, 1.0);
  std::vector<double> x(input_width), y(target_width);
  for (std::size_t i = 0; i < n; ++i) {
    for (auto& v : x) v = ux(rng);
    for (std::size_t j = 0; j < target_width; ++j) {
      const double a = x[j % input_width];
      const double b = x[(j + 1) % input_width];
      y[j] = 3.0 + std::sin(std::numbers::pi * (a + 0.5 * b)) + noise_std * z(rng);
    }
    set.add(x, y);
  }
  set.meta = {{"generator", "smooth_regression"}, {"n", n},
              {"seed", seed},                     {"input_width", input_width},
              {"target_width", target_width},     {"noise_std", noise_std}};
  return set;
}

LabeledSet perturb_inputs(const LabeledSet& set, double a_max, std::uint64_t seed) {
  if (!(a_max >= 0.0)) throw DomainError("perturb_inputs: a_max must be >= 0");
  LabeledSet out = set;
  Rng rng(seed);
  std::uniform_real_distribution<double> ua(0.0, a_max);
  std::normal_distribution<double> z(0.0, 1.0);
  nlohmann::json amps = nlohmann::json::array();
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double a = a_max > 0.0 ? ua(rng) : 0.0;
    amps.push_back(a);
    if (a == 0.0) continue;
    for (auto& v : out.input(i)) v += a * z(rng);
  }
  out.meta["perturbation"] = {{"kind", "additive_input_gaussian"}, {"a_max", a_max},
                              {"seed", seed}};
  out.meta["amplitudes"] = std::move(amps);
  return out;
}

void mix_samples(const LabeledSet& set, std::span<const std::size_t> rows,
                 std::span<const double> weights, std::span<double> x_out,
                 std::span<double> y_out) {
  if (rows.size() != weights.size() || rows.empty())
    throw DimensionError("mix_samples: rows and weights must be nonempty and aligned");
  if (x_out.size() != set.input_width || y_out.size() != set.target_width)
    throw DimensionError("mix_samples: output width mismatch");
  std::fill(x_out.begin(), x_out.end(), 0.0);
  std::fill(y_out.begin(), y_out.end(), 0.0);
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const auto x = set.input(rows[k]);
    const auto y = set.target(rows[k]);
    for (std::size_t i = 0; i < x.size(); ++i) x_out[i] += weights[k] * x[i];
    for (std::size_t i = 0; i < y.size(); ++i) y_out[i] += weights[k] * y[i];
  }
}

LabeledSet mixup(const LabeledSet& batch, const MixupMode& mode, std::uint64_t seed) {
  const std::size_t n = batch.size();
  const std::size_t k =
      std::holds_alternative<PairwiseMixup>(mode) ? 2 : std::get<DirichletMixup>(mode).k;
  if (k < 2) throw DomainError("mixup: k must be >= 2");
  if (n < k)
    throw DomainError("mixup: batch of " + std::to_string(n) + " is smaller than k = " +
                      std::to_string(k));
  Rng rng(seed);
  LabeledSet out(batch.input_width, batch.target_width);
  out.inputs.resize(n * batch.input_width);
  out.targets.resize(n * batch.target_width);

  if (const auto* pw = std::get_if<PairwiseMixup>(&mode)) {
    if (!(pw->alpha > 0.0)) throw DomainError("mixup: alpha must be > 0");
    std::vector<std::size_t> partner(n);
    std::iota(partner.begin(), partner.end(), 0);
    std::shuffle(partner.begin(), partner.end(), rng);
    for (std::size_t i = 0; i < n; ++i) {
      const double lambda = sample_beta(rng, pw->alpha, pw->alpha);
      const std::size_t rows[2] = {i, partner[i]};
      const double weights[2] = {lambda, 1.0 - lambda};
      mix_samples(batch, rows, weights, out.input(i), out.target(i));
    }
  } else {
    const auto& dm = std::get<DirichletMixup>(mode);
    if (!(dm.alpha > 0.0)) throw DomainError("mixup: alpha must be > 0");
    std::vector<std::size_t> pool(n);
    std::iota(pool.begin(), pool.end(), 0);
    for (std::size_t i = 0; i < n; ++i) {
      // Partial Fisher-Yates: first k entries become a uniform k-subset.
      for (std::size_t j = 0; j < dm.k; ++j) {
        std::uniform_int_distribution<std::size_t> pick(j, n - 1);
        std::swap(pool[j], pool[pick(rng)]);
      }
      const auto weights = sample_dirichlet(rng, dm.k, dm.alpha);
      mix_samples(batch, std::span(pool.data(), dm.k), weights, out.input(i), out.target(i));
    }
  }
  out.meta = batch.meta;
  out.meta["mixup"] = std::holds_alternative<PairwiseMixup>(mode)
                          ? nlohmann::json{{"mode", "pairwise"},
                                           {"alpha", std::get<PairwiseMixup>(mode).alpha}}
                          : nlohmann::json{{"mode", "dirichlet"},
                                           {"k", std::get<DirichletMixup>(mode).k},
                                           {"alpha", std::get<DirichletMixup>(mode).alpha}};
  return out;
}

std::vector<double> one_hot(std::size_t label, std::size_t classes) {
  if (classes < 2) throw DomainError("one_hot: need at least 2 classes");
  if (label >= classes)
    throw DomainError("one_hot: label " + std::to_string(label) + " out of range for " +
                      std::to_string(classes) + " classes");
  std::vector<double> v(classes, 0.0);
  v[label] = 1.0;
  return v;
}

std::vector<LabeledSet> split(const LabeledSet& set, std::span<const double> fractions,
                              std::uint64_t seed) {
  const std::size_t n = set.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<LabeledSet> parts;
  std::size_t begin = 0;
  double cumulative = 0.0;
  for (std::size_t p = 0; p < fractions.size(); ++p) {
    cumulative += fractions[p];
    std::size_t end = p + 1 == fractions.size()
                          ? n
                          : std::min(n, static_cast<std::size_t>(std::llround(cumulative * n)));
    end = std::max(end, begin);
    std::vector<std::size_t> rows(order.begin() + static_cast<std::ptrdiff_t>(begin),
                                  order.begin() + static_cast<std::ptrdiff_t>(end));
    std::sort(rows.begin(), rows.end());
    parts.push_back(set.subset(rows));
    begin = end;
  }
  return parts;
}

std::filesystem::path meta_path(const std::filesystem::path& csv_path) {
  auto p = csv_path;
  p += ".meta.json";
  return p;
}

void csv_write(const LabeledSet& set, const std::filesystem::path& path) {
  Table t;
  for (std::size_t i = 0; i < set.input_width; ++i) t.columns.push_back("x" + std::to_string(i));
  for (std::size_t i = 0; i < set.target_width; ++i) t.columns.push_back("y" + std::to_string(i));
  for (std::size_t r = 0; r < set.size(); ++r) {
    std::vector<double> row(set.input(r).begin(), set.input(r).end());
    row.insert(row.end(), set.target(r).begin(), set.target(r).end());
    t.rows.push_back(std::move(row));
  }
  write_csv(t, path);
  write_json(meta_path(path), set.meta);
}

LabeledSet csv_read(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path))
    throw DataError("dataset file not found: '" + path.string() + "'");
  const Table t = read_csv(path);
  std::size_t nx = 0;
  while (nx < t.columns.size() && t.columns[nx] == "x" + std::to_string(nx)) ++nx;
  std::size_t ny = 0;
  while (nx + ny < t.columns.size() && t.columns[nx + ny] == "y" + std::to_string(ny)) ++ny;
  if (nx == 0 || ny == 0 || nx + ny != t.columns.size()) {
    const std::size_t bad = nx + ny < t.columns.size() ? nx + ny : t.columns.size();
    const std::string expected = nx == 0 ? "x0" : (ny == 0 ? "y0" : "end of header");
    const std::string found = bad < t.columns.size() ? t.columns[bad] : "end of header";
    throw DataError(path.string() + ":1: header mismatch: expected '" + expected +
                        "', found '" + found + "'",
                    1);
  }
  LabeledSet set(nx, ny);
  for (const auto& row : t.rows)
    set.add(std::span(row.data(), nx), std::span(row.data() + nx, ny));
  const auto mp = meta_path(path);
  if (std::filesystem::exists(mp)) set.meta = read_json(mp);
  return set;
}

}  // namespace hcm::data
