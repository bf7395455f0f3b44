#include "hcm/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "hcm/data.hpp"
#include "hcm/error.hpp"
#include "hcm/head.hpp"
#include "hcm/random.hpp"
#include "hcm/train.hpp"

namespace hcm {
namespace {

using nlohmann::json;

// Stream ids for derive_seed; init uses stream 0.
enum SeedStream : std::uint64_t {
  kDataSeed = 2,
  kSplitSeed = 3,
  kPerturbSeed = 4,
};

double mean_of(std::span<const double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double median_of(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::size_t argmax(std::span<const double> v) {
  return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

data::LabeledSet scaled_targets(const data::LabeledSet& set, double scale, bool embed) {
  data::LabeledSet out(set.input_width, embed ? 2 : set.target_width);
  out.meta = set.meta;
  for (std::size_t i = 0; i < set.size(); ++i) {
    const auto y = set.target(i);
    if (embed) {
      const auto e = embed_scalar(y[0] * scale);
      out.add(set.input(i), e);
    } else {
      std::vector<double> t(y.begin(), y.end());
      for (auto& v : t) v *= scale;
      out.add(set.input(i), t);
    }
  }
  return out;
}

nn::NetworkParams train_model(const RunConfig& config, const data::LabeledSet& train_set,
                              std::vector<double>& loss_log) {
  auto params = build_network(config, static_cast<int>(train_set.input_width),
                              static_cast<int>(train_set.target_width + 1));
  const auto log = train(params, train_set, train_config(config));
  loss_log = log.epoch_loss;
  return params;
}

// Standard per-sample columns shared by every experiment.
Table score_table(const data::LabeledSet& set, const ScoredSet& scored,
                  const CalibrationModel& cal, std::span<const double> conf_norm,
                  double target_scale) {
  Table t;
  for (std::size_t i = 0; i < set.input_width; ++i) t.columns.push_back("x" + std::to_string(i));
  const std::size_t n_pred = scored.predictions.empty() ? 0 : scored.predictions[0].size();
  for (std::size_t i = 0; i < n_pred; ++i) t.columns.push_back("y_hat" + std::to_string(i));
  for (const char* c : {"R_hat", "d_norm", "u", "u_cal", "conf", "conf_norm", "r"})
    t.columns.emplace_back(c);
  for (std::size_t i = 0; i < set.size(); ++i) {
    std::vector<double> row(set.input(i).begin(), set.input(i).end());
    row.insert(row.end(), scored.predictions[i].begin(), scored.predictions[i].end());
    const auto& out = scored.outputs[i];
    row.push_back(out.magnitude / target_scale);
    row.push_back(out.direction_norm());
    row.push_back(scored.u[i]);
    row.push_back(cal.calibrated(scored.u[i]));
    row.push_back(cal.confidence(scored.u[i]));
    row.push_back(conf_norm[i]);
    row.push_back(scored.errors[i]);
    t.add_row(std::move(row));
  }
  return t;
}

void append_column(Table& t, const std::string& name, std::span<const double> values) {
  t.columns.push_back(name);
  for (std::size_t i = 0; i < t.rows.size(); ++i) t.rows[i].push_back(values[i]);
}

void append_rows(Table& into, const Table& from) {
  if (into.columns.empty()) into.columns = from.columns;
  for (const auto& r : from.rows) into.add_row(r);
}

std::vector<double> calibrated(const CalibrationModel& cal, std::span<const double> u) {
  std::vector<double> out(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) out[i] = cal.calibrated(u[i]);
  return out;
}

json threshold_json(const RunConfig& config, std::span<const double> val_u_cal) {
  const auto kind = config.calibration.threshold == ThresholdKind::kTolerance
                        ? ThresholdPolicy::Kind::kTolerance
                        : ThresholdPolicy::Kind::kQuantileTail;
  return to_json(fit_threshold(kind, val_u_cal, config.calibration.threshold_value));
}

data::LabeledSet regression_data(const RunConfig& config) {
  if (!config.data.path.empty()) return data::csv_read(config.data.path);
  return data::gen_smooth_regression(config.data.n, config.data.input_width,
                                     config.data.target_width, config.data.noise_std,
                                     derive_seed(config.seed, kDataSeed));
}

std::vector<data::LabeledSet> three_way_split(const RunConfig& config, const data::LabeledSet& set) {
  const double fractions[3] = {1.0 - config.data.val_fraction - config.data.test_fraction,
                               config.data.val_fraction, config.data.test_fraction};
  return data::split(set, fractions, derive_seed(config.seed, kSplitSeed));
}

}  // namespace

data::LabeledSet experiment_dataset(const RunConfig& config) {
  validate(config);
  if (!config.data.path.empty()) return data::csv_read(config.data.path);
  const auto seed = derive_seed(config.seed, kDataSeed);
  if (config.experiment == "toy1d") return data::gen_cubic(config.data.n, seed);
  if (config.experiment == "two-moons")
    return data::gen_two_moons(config.data.n, config.data.noise_std, seed);
  if (config.experiment == "blob-ood")
    return data::gen_blobs_ood(config.data.n, config.data.n_ood, config.data.input_width, seed,
                               config.data.blobs)
        .first;
  return regression_data(config);
}

data::LabeledSet training_targets(const data::LabeledSet& set, double scale) {
  return scaled_targets(set, scale, set.target_width == 1);
}

ScoredSet score_set(const nn::NetworkParams& params, const data::LabeledSet& set,
                    double target_scale, bool scalar_targets) {
  ScoredSet s;
  s.outputs = predict(params, set);
  s.predictions.reserve(set.size());
  for (std::size_t i = 0; i < set.size(); ++i) {
    const auto& out = s.outputs[i];
    auto y_hat = recompose(out);
    for (auto& v : y_hat) v /= target_scale;
    if (scalar_targets) y_hat = {readback_scalar(y_hat)};
    const auto y = set.target(i);
    if (y.size() != y_hat.size())
      throw DimensionError("score_set: prediction width " + std::to_string(y_hat.size()) +
                           " != target width " + std::to_string(y.size()));
    double se = 0.0;
    for (std::size_t j = 0; j < y.size(); ++j) se += (y_hat[j] - y[j]) * (y_hat[j] - y[j]);
    s.errors.push_back(std::sqrt(se / static_cast<double>(y.size())));
    s.u.push_back(uncertainty_score(out) / target_scale);
    s.predictions.push_back(std::move(y_hat));
  }
  return s;
}

CalibrationModel fit_calibration(std::span<const double> val_u, std::span<const double> val_errors,
                                 Normalization normalizer) {
  CalibrationModel model;
  model.temperature = fit_temperature(val_u, val_errors);
  std::vector<double> conf(val_u.size());
  for (std::size_t i = 0; i < val_u.size(); ++i) conf[i] = model.confidence(val_u[i]);
  if (normalizer == Normalization::kMinMax)
    model.normalizer = fit_minmax(conf);
  else
    model.normalizer = fit_quantile(conf);
  return model;
}

std::vector<double> report_confidences(const CalibrationModel& model, std::span<const double> u) {
  std::vector<double> conf(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) conf[i] = model.confidence(u[i]);
  if (std::holds_alternative<MinMaxNormalizer>(model.normalizer)) return normalize_minmax(conf);
  const auto& q = std::get<QuantileNormalizer>(model.normalizer);
  for (auto& c : conf) c = normalize_quantile(c, q);
  return conf;
}

RunArtifacts run_toy1d(const RunConfig& config) {
  validate(config);
  RunArtifacts art;
  art.config = config;
  const double scale = config.data.target_scale;
  const data::CubicSpec cubic;
  const auto full = data::gen_cubic(config.data.n, derive_seed(config.seed, kDataSeed), cubic);
  const double fractions[2] = {1.0 - config.data.val_fraction, config.data.val_fraction};
  const auto parts = data::split(full, fractions, derive_seed(config.seed, kSplitSeed));
  const auto& train_raw = parts[0];
  const auto& val = parts[1];

  art.params = train_model(config, scaled_targets(train_raw, scale, true), art.training_loss);

  const auto val_scored = score_set(art.params, val, scale, true);
  art.calibration = fit_calibration(val_scored.u, val_scored.errors, config.calibration.normalizer);
  const auto& cal = *art.calibration;
  art.scores = score_table(val, val_scored, cal, report_confidences(cal, val_scored.u), scale);

  // Dense grid over [-6, 6]: training domain is [-4, 4].
  const std::size_t g = config.data.grid_points;
  Eigen::MatrixXd grid(1, static_cast<Eigen::Index>(g));
  for (std::size_t i = 0; i < g; ++i)
    grid(0, static_cast<Eigen::Index>(i)) = -6.0 + 12.0 * static_cast<double>(i) / (g - 1);
  const auto outs = predict(art.params, grid);
  Table bands;
  bands.columns = {"x",   "y_true", "y_hat", "sigma_true", "sigma_hat", "u",
                   "lo1", "hi1",    "lo2",   "hi2",        "lo3",       "hi3"};
  std::vector<double> sig_true_noisy, sig_hat_noisy, sig_hat_beyond, sig_hat_quiet;
  for (std::size_t i = 0; i < g; ++i) {
    const double x = grid(0, static_cast<Eigen::Index>(i));
    const auto& out = outs[i];
    auto y_hat_vec = recompose(out);
    const double y_hat = readback_scalar(y_hat_vec) / scale;
    const double sigma_hat = std::sqrt(sigma_hat_sq(out)) / scale;
    const double sigma_true = data::cubic_noise_std(x, cubic);
    const double u = uncertainty_score(out) / scale;
    bands.add_row({x, x * x * x, y_hat, sigma_true, sigma_hat, u, y_hat - sigma_hat,
                   y_hat + sigma_hat, y_hat - 2 * sigma_hat, y_hat + 2 * sigma_hat,
                   y_hat - 3 * sigma_hat, y_hat + 3 * sigma_hat});
    if (x >= cubic.noise_lo && x <= cubic.noise_hi) {
      sig_true_noisy.push_back(sigma_true);
      sig_hat_noisy.push_back(sigma_hat);
    }
    if (x >= 5.0 && x <= 6.0) sig_hat_beyond.push_back(sigma_hat);
    if (x >= 3.0 && x <= 4.0) sig_hat_quiet.push_back(sigma_hat);
  }
  art.tables["bands.csv"] = std::move(bands);

  std::vector<double> abs_y;
  for (std::size_t i = 0; i < val.size(); ++i) abs_y.push_back(std::abs(val.target(i)[0]));
  const auto val_u_cal = calibrated(cal, val_scored.u);
  art.metrics = {
      {"experiment", "toy1d"},
      {"sigma_pearson_noisy_interval", metrics::pearson(sig_hat_noisy, sig_true_noisy)},
      {"mean_sigma_hat_beyond_domain", mean_of(sig_hat_beyond)},
      {"mean_sigma_hat_noise_free", mean_of(sig_hat_quiet)},
      {"val_mean_u", mean_of(val_scored.u)},
      {"val_mean_abs_y", mean_of(abs_y)},
      {"temperature", cal.temperature},
      {"threshold", threshold_json(config, val_u_cal)},
      {"validation", metrics::to_json(metrics::evaluate(val_u_cal, val_scored.errors,
                                                        config.calibration.bins))}};
  return art;
}

std::vector<double> boundary_distances(const nn::NetworkParams& params,
                                       std::span<const double> xs, std::span<const double> ys,
                                       const BoundaryGrid& grid, std::size_t* boundary_points) {
  const std::size_t res = grid.resolution;
  Eigen::MatrixXd nodes(2, static_cast<Eigen::Index>(res * res));
  auto gx = [&](std::size_t i) { return grid.x_lo + (grid.x_hi - grid.x_lo) * i / (res - 1.0); };
  auto gy = [&](std::size_t j) { return grid.y_lo + (grid.y_hi - grid.y_lo) * j / (res - 1.0); };
  for (std::size_t j = 0; j < res; ++j)
    for (std::size_t i = 0; i < res; ++i) {
      nodes(0, static_cast<Eigen::Index>(j * res + i)) = gx(i);
      nodes(1, static_cast<Eigen::Index>(j * res + i)) = gy(j);
    }
  const auto outs = predict(params, nodes);
  std::vector<std::size_t> cls(outs.size());
  for (std::size_t k = 0; k < outs.size(); ++k) cls[k] = argmax(recompose(outs[k]));

  std::vector<std::array<double, 2>> boundary;
  for (std::size_t j = 0; j < res; ++j)
    for (std::size_t i = 0; i < res; ++i) {
      const std::size_t k = j * res + i;
      if (i + 1 < res && cls[k] != cls[k + 1])
        boundary.push_back({0.5 * (gx(i) + gx(i + 1)), gy(j)});
      if (j + 1 < res && cls[k] != cls[k + res])
        boundary.push_back({gx(i), 0.5 * (gy(j) + gy(j + 1))});
    }
  if (boundary_points) *boundary_points = boundary.size();
  std::vector<double> dist(xs.size(), std::numeric_limits<double>::infinity());
  for (std::size_t n = 0; n < xs.size(); ++n)
    for (const auto& b : boundary)
      dist[n] = std::min(dist[n], std::hypot(xs[n] - b[0], ys[n] - b[1]));
  return dist;
}

RunArtifacts run_two_moons(const RunConfig& config) {
  validate(config);
  RunArtifacts art;
  art.config = config;
  const auto full =
      data::gen_two_moons(config.data.n, config.data.noise_std, derive_seed(config.seed, kDataSeed));
  const double fractions[2] = {1.0 - config.data.val_fraction, config.data.val_fraction};
  const auto parts = data::split(full, fractions, derive_seed(config.seed, kSplitSeed));
  art.params = train_model(config, parts[0], art.training_loss);

  const auto val_scored = score_set(art.params, parts[1]);
  art.calibration = fit_calibration(val_scored.u, val_scored.errors, config.calibration.normalizer);
  const auto& cal = *art.calibration;

  const auto scored = score_set(art.params, full);
  std::vector<double> xs, ys;
  double lo_x = std::numeric_limits<double>::infinity(), hi_x = -lo_x;
  double lo_y = lo_x, hi_y = -lo_x;
  for (std::size_t i = 0; i < full.size(); ++i) {
    xs.push_back(full.input(i)[0]);
    ys.push_back(full.input(i)[1]);
    lo_x = std::min(lo_x, xs.back());
    hi_x = std::max(hi_x, xs.back());
    lo_y = std::min(lo_y, ys.back());
    hi_y = std::max(hi_y, ys.back());
  }
  const double pad_x = 0.2 * (hi_x - lo_x);
  const double pad_y = 0.2 * (hi_y - lo_y);
  std::size_t n_boundary = 0;
  const auto dist = boundary_distances(
      art.params, xs, ys, {lo_x - pad_x, hi_x + pad_x, lo_y - pad_y, hi_y + pad_y, 200},
      &n_boundary);

  std::vector<double> labels, predicted, d0, d1, is_val;
  std::size_t correct = 0;
  std::vector<char> in_val(full.size(), 0);
  // split() keeps rows sorted; recover membership by matching inputs.
  for (std::size_t i = 0, v = 0; i < full.size() && v < parts[1].size(); ++i) {
    if (std::equal(full.input(i).begin(), full.input(i).end(), parts[1].input(v).begin())) {
      in_val[i] = 1;
      ++v;
    }
  }
  std::size_t train_correct = 0, train_total = 0;
  std::vector<double> high_u_dist;
  for (std::size_t i = 0; i < full.size(); ++i) {
    const double label = static_cast<double>(argmax(full.target(i)));
    const double pred = static_cast<double>(argmax(scored.predictions[i]));
    labels.push_back(label);
    predicted.push_back(pred);
    d0.push_back(scored.outputs[i].direction[0]);
    d1.push_back(scored.outputs[i].direction[1]);
    is_val.push_back(in_val[i]);
    if (label == pred) ++correct;
    if (!in_val[i]) {
      ++train_total;
      if (label == pred) ++train_correct;
    }
    if (scored.u[i] > 0.15) high_u_dist.push_back(dist[i]);
  }

  art.scores = score_table(full, scored, cal, report_confidences(cal, scored.u), 1.0);
  append_column(art.scores, "d_hat0", d0);
  append_column(art.scores, "d_hat1", d1);
  append_column(art.scores, "label", labels);
  append_column(art.scores, "predicted", predicted);
  append_column(art.scores, "boundary_distance", dist);
  append_column(art.scores, "validation", is_val);

  const bool degenerate = n_boundary == 0;
  json spearman_ud = nullptr;
  if (!degenerate) spearman_ud = metrics::spearman(scored.u, dist);
  const auto val_u_cal = calibrated(cal, val_scored.u);
  art.metrics = {
      {"experiment", "two-moons"},
      {"degenerate_classifier", degenerate},
      {"boundary_points", n_boundary},
      {"train_accuracy", static_cast<double>(train_correct) / static_cast<double>(train_total)},
      {"accuracy", static_cast<double>(correct) / static_cast<double>(full.size())},
      {"spearman_u_boundary_distance", spearman_ud},
      {"median_boundary_distance", degenerate ? json(nullptr) : json(median_of(dist))},
      {"high_u_threshold", 0.15},
      {"high_u_count", high_u_dist.size()},
      {"median_boundary_distance_high_u",
       degenerate ? json(nullptr) : number_or_null(median_of(high_u_dist))},
      {"temperature", cal.temperature},
      {"threshold", threshold_json(config, val_u_cal)},
      {"validation", metrics::to_json(metrics::evaluate(val_u_cal, val_scored.errors,
                                                        config.calibration.bins))}};
  return art;
}

RunArtifacts run_noise_shift(const RunConfig& config) {
  validate(config);
  RunArtifacts art;
  art.config = config;
  const auto full = regression_data(config);
  const auto parts = three_way_split(config, full);
  const auto& train_set = parts[0];
  const auto& val = parts[1];
  const auto& test = parts[2];
  if (val.size() < 10 || test.size() < 2)
    throw ConfigError("data.n", "too few samples for validation/test splits");
  const double scale = config.data.target_scale;
  art.params = train_model(config, scaled_targets(train_set, scale, false), art.training_loss);

  const auto val_scored = score_set(art.params, val, scale);
  art.calibration = fit_calibration(val_scored.u, val_scored.errors, config.calibration.normalizer);
  const auto& cal = *art.calibration;

  const auto perturbed = data::perturb_inputs(test, config.data.a_max,
                                              derive_seed(config.seed, kPerturbSeed));
  const auto clean_scored = score_set(art.params, test, scale);
  const auto pert_scored = score_set(art.params, perturbed, scale);
  const auto clean_norm = report_confidences(cal, clean_scored.u);
  const auto pert_norm = report_confidences(cal, pert_scored.u);

  Table clean_table = score_table(test, clean_scored, cal, clean_norm, scale);
  Table pert_table = score_table(perturbed, pert_scored, cal, pert_norm, scale);
  std::vector<double> zeros(test.size(), 0.0), ones(test.size(), 1.0), amps;
  for (const auto& a : perturbed.meta["amplitudes"]) amps.push_back(a.get<double>());
  append_column(clean_table, "perturbed", zeros);
  append_column(clean_table, "amplitude", zeros);
  append_column(pert_table, "perturbed", ones);
  append_column(pert_table, "amplitude", amps);
  append_rows(art.scores, clean_table);
  append_rows(art.scores, pert_table);

  // Calibration curve on the perturbed split: equal-width confidence bins.
  const int bins = config.calibration.bins;
  std::vector<double> sum_c(static_cast<std::size_t>(bins), 0.0), sum_e(sum_c), count(sum_c);
  for (std::size_t i = 0; i < pert_norm.size(); ++i) {
    const int b = std::clamp(static_cast<int>(pert_norm[i] * bins), 0, bins - 1);
    sum_c[static_cast<std::size_t>(b)] += pert_norm[i];
    sum_e[static_cast<std::size_t>(b)] += pert_scored.errors[i];
    count[static_cast<std::size_t>(b)] += 1.0;
  }
  Table curve;
  curve.columns = {"bin_lo", "bin_hi", "count", "mean_confidence", "mean_error"};
  std::vector<double> curve_c, curve_e;
  for (int b = 0; b < bins; ++b) {
    const auto k = static_cast<std::size_t>(b);
    const double mc = count[k] > 0 ? sum_c[k] / count[k] : std::numeric_limits<double>::quiet_NaN();
    const double me = count[k] > 0 ? sum_e[k] / count[k] : std::numeric_limits<double>::quiet_NaN();
    curve.add_row({static_cast<double>(b) / bins, static_cast<double>(b + 1) / bins, count[k], mc, me});
    if (count[k] > 0) {
      curve_c.push_back(mc);
      curve_e.push_back(me);
    }
  }
  art.tables["calibration-curve.csv"] = std::move(curve);

  std::vector<double> clean_conf, pert_conf;
  for (double u : clean_scored.u) clean_conf.push_back(cal.confidence(u));
  for (double u : pert_scored.u) pert_conf.push_back(cal.confidence(u));
  const auto val_u_cal = calibrated(cal, val_scored.u);
  const auto clean_u_cal = calibrated(cal, clean_scored.u);
  const auto pert_u_cal = calibrated(cal, pert_scored.u);
  const auto kind = config.calibration.threshold == ThresholdKind::kTolerance
                        ? ThresholdPolicy::Kind::kTolerance
                        : ThresholdPolicy::Kind::kQuantileTail;
  const auto policy = fit_threshold(kind, val_u_cal, config.calibration.threshold_value);
  auto flagged = [&](std::span<const double> u_cal) {
    double f = 0.0;
    for (double u : u_cal) f += flag(u, policy) ? 1.0 : 0.0;
    return f / static_cast<double>(u_cal.size());
  };
  art.metrics = {
      {"experiment", "noise-shift"},
      {"temperature", cal.temperature},
      {"threshold", to_json(policy)},
      {"validation",
       metrics::to_json(metrics::evaluate(val_u_cal, val_scored.errors, config.calibration.bins))},
      {"clean",
       metrics::to_json(metrics::evaluate(clean_u_cal, clean_scored.errors, config.calibration.bins))},
      {"perturbed",
       metrics::to_json(metrics::evaluate(pert_u_cal, pert_scored.errors, config.calibration.bins))},
      {"mean_confidence_clean", mean_of(clean_conf)},
      {"mean_confidence_perturbed", mean_of(pert_conf)},
      {"flagged_fraction_clean", flagged(clean_u_cal)},
      {"flagged_fraction_perturbed", flagged(pert_u_cal)},
      {"calibration_curve_nonempty_bins", curve_c.size()},
      {"calibration_curve_spearman",
       curve_c.size() >= 2 ? json(metrics::spearman(curve_c, curve_e)) : json(nullptr)}};
  return art;
}

RunArtifacts run_blob_ood(const RunConfig& base, bool with_mixup) {
  validate(base);
  RunConfig config = base;
  if (!with_mixup) {
    config.mixup.mode = MixupKind::kNone;
  } else if (config.mixup.mode == MixupKind::kNone) {
    config.mixup.mode = MixupKind::kPairwise;
  }
  RunArtifacts art;
  art.config = config;
  const auto& blobs = config.data.blobs;
  const std::size_t n_total = config.data.n + config.data.n_test;
  auto [id, ood] = data::gen_blobs_ood(n_total, config.data.n_ood, config.data.input_width,
                                       derive_seed(config.seed, kDataSeed), blobs);
  const double train_frac =
      static_cast<double>(config.data.n) * (1.0 - config.data.val_fraction) / n_total;
  const double val_frac = static_cast<double>(config.data.n) * config.data.val_fraction / n_total;
  const double fractions[3] = {train_frac, val_frac, 1.0 - train_frac - val_frac};
  const auto parts = data::split(id, fractions, derive_seed(config.seed, kSplitSeed));
  art.params = train_model(config, parts[0], art.training_loss);

  const auto val_scored = score_set(art.params, parts[1]);
  art.calibration = fit_calibration(val_scored.u, val_scored.errors, config.calibration.normalizer);
  const auto& cal = *art.calibration;

  const auto id_scored = score_set(art.params, parts[2]);
  const auto ood_scored = score_set(art.params, ood);
  std::vector<double> scores = id_scored.u;
  scores.insert(scores.end(), ood_scored.u.begin(), ood_scored.u.end());
  std::vector<metrics::Label> labels(id_scored.u.size(), metrics::Label::kInDistribution);
  labels.resize(scores.size(), metrics::Label::kOutOfDistribution);

  const auto id_u_cal = calibrated(cal, id_scored.u);
  auto report = metrics::evaluate(id_u_cal, id_scored.errors, config.calibration.bins);
  metrics::add_ranking(report, scores, labels);

  // Probe the geometry: cluster centers vs midpoints of adjacent centers.
  const auto centers = data::blob_centers(blobs, config.data.input_width);
  const std::size_t k = centers.size();
  Eigen::MatrixXd probes(static_cast<Eigen::Index>(config.data.input_width),
                         static_cast<Eigen::Index>(2 * k));
  for (std::size_t c = 0; c < k; ++c)
    for (std::size_t d = 0; d < config.data.input_width; ++d) {
      probes(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(c)) = centers[c][d];
      probes(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(k + c)) =
          0.5 * (centers[c][d] + centers[(c + 1) % k][d]);
    }
  const auto probe_out = predict(art.params, probes);
  std::vector<double> center_u, between_u;
  Table probe_table;
  probe_table.columns = {"kind", "x0", "x1", "u", "R_hat", "d_norm"};
  for (std::size_t p = 0; p < probe_out.size(); ++p) {
    const double u = uncertainty_score(probe_out[p]);
    (p < k ? center_u : between_u).push_back(u);
    probe_table.add_row({p < k ? 0.0 : 1.0, probes(0, static_cast<Eigen::Index>(p)),
                         probes(1, static_cast<Eigen::Index>(p)), u, probe_out[p].magnitude,
                         probe_out[p].direction_norm()});
  }
  art.tables["probes.csv"] = std::move(probe_table);

  Table id_table = score_table(parts[2], id_scored, cal, report_confidences(cal, id_scored.u), 1.0);
  Table ood_table = score_table(ood, ood_scored, cal, report_confidences(cal, ood_scored.u), 1.0);
  append_column(id_table, "ood", std::vector<double>(parts[2].size(), 0.0));
  append_column(ood_table, "ood", std::vector<double>(ood.size(), 1.0));
  append_rows(art.scores, id_table);
  append_rows(art.scores, ood_table);

  std::size_t correct = 0;
  for (std::size_t i = 0; i < parts[2].size(); ++i)
    if (argmax(parts[2].target(i)) == argmax(id_scored.predictions[i])) ++correct;

  const auto val_u_cal = calibrated(cal, val_scored.u);
  art.metrics = {{"experiment", "blob-ood"},
                 {"mixup", with_mixup},
                 {"auroc", *report.auroc},
                 {"fpr_at_95tpr", *report.fpr_at_95tpr},
                 {"id_accuracy", static_cast<double>(correct) / parts[2].size()},
                 {"mean_u_id", mean_of(id_scored.u)},
                 {"mean_u_ood", mean_of(ood_scored.u)},
                 {"mean_u_centers", mean_of(center_u)},
                 {"mean_u_between", mean_of(between_u)},
                 {"temperature", cal.temperature},
                 {"threshold", threshold_json(config, val_u_cal)},
                 {"id_test", metrics::to_json(report)}};
  return art;
}

RunArtifacts run_lambda_sweep(const RunConfig& base, std::span<const double> lambdas) {
  validate(base);
  if (lambdas.empty()) throw ConfigError("lambdas", "must be nonempty");
  RunArtifacts art;
  art.config = base;
  art.config.lambdas.assign(lambdas.begin(), lambdas.end());
  const auto full = regression_data(base);
  const auto parts = three_way_split(base, full);
  const double scale = base.data.target_scale;
  const auto train_set = scaled_targets(parts[0], scale, false);

  Table sweep;
  sweep.columns = {"lambda", "val_error", "mean_u", "median_norm_deviation", "final_loss", "stable"};
  json rows = json::array();
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    RunConfig config = base;
    config.loss.lambda_norm = lambdas[i];
    std::vector<double> loss_log;
    double val_error = std::numeric_limits<double>::quiet_NaN();
    double mean_u = val_error, median_dev = val_error, final_loss = val_error;
    bool stable = false;
    nn::NetworkParams params;
    try {
      params = train_model(config, train_set, loss_log);
      const auto scored = score_set(params, parts[1], scale);
      std::vector<double> dev;
      for (const auto& o : scored.outputs) dev.push_back(std::abs(o.direction_norm() - 1.0));
      val_error = mean_of(scored.errors);
      mean_u = mean_of(scored.u);
      median_dev = median_of(dev);
      final_loss = loss_log.back();
      const bool finite = std::all_of(loss_log.begin(), loss_log.end(),
                                      [](double v) { return std::isfinite(v); });
      stable = finite && std::isfinite(val_error) && median_dev < 0.5;
    } catch (const DivergenceError&) {
      stable = false;
    } catch (const NonFiniteError&) {
      stable = false;
    }
    if (i == 0) {
      art.params = params;
      art.training_loss = loss_log;
    }
    sweep.add_row({lambdas[i], val_error, mean_u, median_dev, final_loss, stable ? 1.0 : 0.0});
    rows.push_back({{"lambda", lambdas[i]},
                    {"val_error", number_or_null(val_error)},
                    {"mean_u", number_or_null(mean_u)},
                    {"median_norm_deviation", number_or_null(median_dev)},
                    {"final_loss", number_or_null(final_loss)},
                    {"stable", stable}});
  }
  art.scores = sweep;
  art.tables["sweep.csv"] = std::move(sweep);
  art.metrics = {{"experiment", "lambda-sweep"}, {"rows", std::move(rows)}};
  return art;
}

RunArtifacts run_experiment(const RunConfig& config) {
  if (config.experiment == "toy1d") return run_toy1d(config);
  if (config.experiment == "two-moons") return run_two_moons(config);
  if (config.experiment == "noise-shift") return run_noise_shift(config);
  if (config.experiment == "blob-ood")
    return run_blob_ood(config, config.mixup.mode != MixupKind::kNone);
  if (config.experiment == "lambda-sweep") return run_lambda_sweep(config, config.lambdas);
  default_config(config.experiment);  // throws with the list of valid names
  throw ConfigError("experiment", "unknown experiment");
}

void write_manifest(const std::filesystem::path& dir) {
  std::vector<std::string> names;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const auto name = entry.path().filename().string();
    if (name != "manifest.json") names.push_back(name);
  }
  std::sort(names.begin(), names.end());
  json files = json::array();
  for (const auto& name : names)
    files.push_back({{"name", name},
                     {"bytes", std::filesystem::file_size(dir / name)},
                     {"sha256", sha256_hex(dir / name)}});
  write_json(dir / "manifest.json", {{"files", std::move(files)}});
}

std::vector<std::string> verify_manifest(const std::filesystem::path& dir) {
  const auto doc = read_json(dir / "manifest.json");
  std::vector<std::string> bad;
  for (const auto& f : doc.at("files")) {
    const auto name = f.at("name").get<std::string>();
    const auto path = dir / name;
    if (!std::filesystem::exists(path) || sha256_hex(path) != f.at("sha256").get<std::string>())
      bad.push_back(name);
  }
  return bad;
}

void write_run_directory(const RunArtifacts& art, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_json(dir / "config.json", to_json(art.config));
  write_json(dir / "params.json", nn::to_json(art.params));
  if (art.calibration) write_json(dir / "calibration.json", to_json(*art.calibration));
  write_json(dir / "metrics.json", art.metrics);
  write_csv(art.scores, dir / "scores.csv");
  Table loss;
  loss.columns = {"epoch", "loss"};
  for (std::size_t e = 0; e < art.training_loss.size(); ++e)
    loss.add_row({static_cast<double>(e), art.training_loss[e]});
  write_csv(loss, dir / "training-loss.csv");
  for (const auto& [name, table] : art.tables) write_csv(table, dir / name);
  write_manifest(dir);
}

}  // namespace hcm
