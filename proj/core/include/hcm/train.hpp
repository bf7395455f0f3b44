#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "hcm/data.hpp"
#include "hcm/head.hpp"
#include "hcm/loss.hpp"
#include "hcm/nn.hpp"

namespace hcm {

// The network's raw output is laid out as [d_hat_0 .. d_hat_{D-1}, R_hat].
HcmOutput split_output(const Eigen::Ref<const Eigen::VectorXd>& raw);

Eigen::MatrixXd input_matrix(const data::LabeledSet& set);
std::vector<HcmOutput> predict(const nn::NetworkParams& params, const Eigen::MatrixXd& inputs);
std::vector<HcmOutput> predict(const nn::NetworkParams& params, const data::LabeledSet& set);

// Which objective drives the heads: the relaxed magnitude/direction loss, or
// the plain squared error of the recomposed prediction (plus the same
// lambda-weighted norm penalty).
enum class Objective { kDecomposed, kExactPrimal };

struct TrainConfig {
  nn::OptimizerKind optimizer = nn::Adam{};
  std::vector<int> lr_milestones;  // epochs at which lr is multiplied by lr_gamma
  double lr_gamma = 0.1;
  LossSpec loss;
  Objective objective = Objective::kDecomposed;
  int epochs = 100;
  std::size_t batch_size = 64;
  std::optional<data::MixupMode> mixup;
  std::uint64_t seed = 0;
};

struct TrainLog {
  std::vector<double> epoch_loss;  // mean per-sample objective
};

// Per-sample objective value and gradient w.r.t. the raw output column.
double sample_objective(const TrainConfig& config, const TargetDecomposition& target,
                        const HcmOutput& out, std::span<double> raw_grad);

// Mini-batch training with mean reduction. Targets must have width >= 2 and
// be nonzero. Throws DivergenceError on a non-finite epoch loss.
TrainLog train(nn::NetworkParams& params, const data::LabeledSet& train_set,
               const TrainConfig& config);

}  // namespace hcm
