#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hcm/calibrate.hpp"
#include "hcm/config.hpp"
#include "hcm/format.hpp"
#include "hcm/metrics.hpp"
#include "hcm/nn.hpp"

namespace hcm {

struct RunArtifacts {
  RunConfig config;
  nn::NetworkParams params;
  std::optional<CalibrationModel> calibration;
  nlohmann::json metrics = nlohmann::json::object();
  // Per-sample table: inputs, predictions, R_hat, d_norm, u, u_cal, conf, r
  // plus experiment-specific columns.
  Table scores;
  // Extra plot-ready tables keyed by file name (bands.csv, ...).
  std::map<std::string, Table> tables;
  std::vector<double> training_loss;
};

// Columns and metrics produced when a trained model is scored against a set.
struct ScoredSet {
  std::vector<HcmOutput> outputs;
  std::vector<std::vector<double>> predictions;  // in original target units
  std::vector<double> u;
  std::vector<double> errors;  // per-sample RMSE
};

// The synthetic (or data.path) dataset an experiment trains on, before any
// split. Blob-ood returns the in-distribution set.
data::LabeledSet experiment_dataset(const RunConfig& config);

// Training targets: multiplied by `scale`; width-1 targets are embedded as
// (y, y).
data::LabeledSet training_targets(const data::LabeledSet& set, double scale);

// `target_scale` maps original targets to training targets; predictions and
// scores are reported in original units.
ScoredSet score_set(const nn::NetworkParams& params, const data::LabeledSet& set,
                    double target_scale = 1.0, bool scalar_targets = false);

// Fits temperature on validation (u, error), the configured normalizer on
// validation confidences.
CalibrationModel fit_calibration(std::span<const double> val_u, std::span<const double> val_errors,
                                 Normalization normalizer);

// Normalized confidences for one evaluated list: min-max over the list
// itself, or the model's quantile reference.
std::vector<double> report_confidences(const CalibrationModel& model, std::span<const double> u);

// Cubic toy with heteroscedastic noise; bands.csv carries
// prediction +- k sigma_hat and the true sigma on a grid over [-6, 6].
RunArtifacts run_toy1d(const RunConfig& config);

// Two moons: u against distance to the learned decision boundary.
RunArtifacts run_two_moons(const RunConfig& config);

// Clean-validation calibration evaluated on clean and input-perturbed test
// splits; calibration-curve.csv bins the perturbed split by confidence.
RunArtifacts run_noise_shift(const RunConfig& config);

// ID blobs vs a held-out OOD cluster scored by u. With mixup the configured
// mode is used (pairwise with the configured alpha when it says none).
RunArtifacts run_blob_ood(const RunConfig& config, bool with_mixup);

// One run per lambda_norm value on the noise-shift regression data.
RunArtifacts run_lambda_sweep(const RunConfig& config, std::span<const double> lambdas);

// Dispatches on config.experiment (blob-ood uses mixup iff configured).
RunArtifacts run_experiment(const RunConfig& config);

// Boundary distance helper: dense grid scan of predicted-class changes.
struct BoundaryGrid {
  double x_lo, x_hi, y_lo, y_hi;
  std::size_t resolution = 200;
};
std::vector<double> boundary_distances(const nn::NetworkParams& params,
                                       std::span<const double> xs, std::span<const double> ys,
                                       const BoundaryGrid& grid, std::size_t* boundary_points);

// Writes config.json, params.json, calibration.json, metrics.json,
// scores.csv, training-loss.csv, the extra tables and manifest.json
// (sha256 of every other file).
void write_run_directory(const RunArtifacts& artifacts, const std::filesystem::path& dir);
void write_manifest(const std::filesystem::path& dir);
// Names of files whose checksum no longer matches; empty when intact.
std::vector<std::string> verify_manifest(const std::filesystem::path& dir);

}  // namespace hcm
