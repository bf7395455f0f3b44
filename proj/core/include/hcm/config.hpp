#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "hcm/data.hpp"
#include "hcm/loss.hpp"
#include "hcm/nn.hpp"
#include "hcm/train.hpp"

namespace hcm {

enum class Normalization { kMinMax, kQuantile };
enum class ThresholdKind { kTolerance, kQuantile };
enum class MixupKind { kNone, kPairwise, kDirichlet };

struct NetworkConfig {
  std::vector<int> hidden{16, 16};
  nn::ActivationKind activation = nn::ActivationKind::kReLU;
  double leaky_slope = 0.01;
};

struct OptimizerConfig {
  bool adam = true;  // false: plain SGD
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::vector<int> milestones;
  double gamma = 0.1;
};

struct TrainingConfig {
  int epochs = 1000;
  std::size_t batch_size = 64;
};

// Union of the dataset knobs used by the experiments; each experiment reads
// the subset it needs.
struct DataConfig {
  std::string path;  // optional CSV replacing the synthetic regression set
  std::size_t n = 1000;
  double noise_std = 0.1;
  std::size_t input_width = 4;
  std::size_t target_width = 3;
  double val_fraction = 0.1;
  double test_fraction = 0.1;
  double a_max = 0.5;
  std::size_t n_test = 1000;
  std::size_t n_ood = 400;
  double target_scale = 1.0;
  std::size_t grid_points = 601;
  data::BlobSpec blobs;
};

struct CalibrationConfig {
  Normalization normalizer = Normalization::kMinMax;
  int bins = 10;
  ThresholdKind threshold = ThresholdKind::kQuantile;
  double threshold_value = 0.95;
};

struct MixupConfig {
  MixupKind mode = MixupKind::kNone;
  double alpha = 1.0;
  std::size_t k = 20;
};

struct RunConfig {
  std::string experiment;
  std::uint64_t seed = 0;
  NetworkConfig network;
  LossSpec loss;
  Objective objective = Objective::kDecomposed;
  OptimizerConfig optimizer;
  TrainingConfig training;
  DataConfig data;
  CalibrationConfig calibration;
  MixupConfig mixup;
  std::vector<double> lambdas{0.0, 1.0, 3.0, 5.0};
};

const std::vector<std::string>& experiment_names();

// Tuned defaults per experiment. Throws ConfigError for unknown names.
RunConfig default_config(std::string_view experiment);

// Overlays `doc` on the defaults of its experiment. The experiment comes
// from doc["experiment"] or `experiment` (which must agree when both are
// given). Unknown keys and ill-typed values raise ConfigError naming the
// dotted field path.
RunConfig config_from_json(const nlohmann::json& doc,
                           std::optional<std::string_view> experiment = std::nullopt);
nlohmann::json to_json(const RunConfig& config);

// Throws ConfigError when any referenced module's precondition fails.
void validate(const RunConfig& config);

nn::NetworkParams build_network(const RunConfig& config, int input_width, int output_width);
TrainConfig train_config(const RunConfig& config);
std::optional<data::MixupMode> mixup_mode(const MixupConfig& config);

}  // namespace hcm
