#include "hcm/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "hcm/error.hpp"
#include "hcm/random.hpp"

namespace hcm {
namespace {

void set_lr(nn::OptimizerKind& kind, double lr) {
  std::visit([lr](auto& k) { k.lr = lr; }, kind);
}

double get_lr(const nn::OptimizerKind& kind) {
  return std::visit([](const auto& k) { return k.lr; }, kind);
}

}  // namespace

HcmOutput split_output(const Eigen::Ref<const Eigen::VectorXd>& raw) {
  if (raw.size() < 3)
    throw DimensionError("split_output: raw output must hold >= 2 direction entries + magnitude");
  HcmOutput out;
  const auto dim = raw.size() - 1;
  out.direction.assign(raw.data(), raw.data() + dim);
  out.magnitude = raw(dim);
  return out;
}

Eigen::MatrixXd input_matrix(const data::LabeledSet& set) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(set.input_width),
                    static_cast<Eigen::Index>(set.size()));
  for (std::size_t i = 0; i < set.size(); ++i) {
    const auto x = set.input(i);
    for (std::size_t j = 0; j < x.size(); ++j)
      m(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = x[j];
  }
  return m;
}

std::vector<HcmOutput> predict(const nn::NetworkParams& params, const Eigen::MatrixXd& inputs) {
  const auto trace = nn::forward_batch(params, inputs);
  const auto& raw = trace.outputs.back();
  std::vector<HcmOutput> outs;
  outs.reserve(static_cast<std::size_t>(raw.cols()));
  for (Eigen::Index c = 0; c < raw.cols(); ++c) outs.push_back(split_output(raw.col(c)));
  return outs;
}

std::vector<HcmOutput> predict(const nn::NetworkParams& params, const data::LabeledSet& set) {
  return predict(params, input_matrix(set));
}

double sample_objective(const TrainConfig& config, const TargetDecomposition& target,
                        const HcmOutput& out, std::span<double> raw_grad) {
  const std::size_t dim = out.dim();
  if (raw_grad.size() != dim + 1) throw DimensionError("sample_objective: gradient width");
  if (config.objective == Objective::kDecomposed) {
    const auto g = loss_grad(config.loss, target, out);
    std::copy(g.direction.begin(), g.direction.end(), raw_grad.begin());
    raw_grad[dim] = g.magnitude;
    return loss_total(config.loss, target, out).total;
  }
  const auto g = loss_exact_primal_grad(target, out);
  std::copy(g.direction.begin(), g.direction.end(), raw_grad.begin());
  raw_grad[dim] = g.magnitude;
  double value = loss_exact_primal(target, out).direct;
  if (config.loss.lambda_norm > 0.0) {
    // Against a target equal to the prediction only the norm term has a slope.
    const TargetDecomposition on_target{out.magnitude, out.direction};
    const auto gn = loss_grad(config.loss, on_target, out);
    for (std::size_t i = 0; i < dim; ++i) raw_grad[i] += gn.direction[i];
    value += config.loss.lambda_norm * phi(config.loss.phi_norm, std::abs(out.direction_norm() - 1.0));
  }
  return value;
}

TrainLog train(nn::NetworkParams& params, const data::LabeledSet& train_set,
               const TrainConfig& config) {
  validate(config.loss);
  const std::size_t n = train_set.size();
  const std::size_t dim = train_set.target_width;
  if (n == 0) throw DomainError("train: empty training set");
  if (dim < 2) throw DimensionError("train: targets must have width >= 2 (embed scalars)");
  if (static_cast<std::size_t>(params.output_width()) != dim + 1)
    throw DimensionError("train: network output width " + std::to_string(params.output_width()) +
                         " != target width + 1 (" + std::to_string(dim + 1) + ")");
  if (static_cast<std::size_t>(params.input_width()) != train_set.input_width)
    throw DimensionError("train: network input width does not match the data", 0);
  if (config.batch_size == 0) throw DomainError("train: batch size must be >= 1");

  nn::OptimizerState opt = nn::make_optimizer(config.optimizer, params);
  const double base_lr = get_lr(config.optimizer);
  Rng order_rng(derive_seed(config.seed, 1));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);

  TrainLog log;
  std::uint64_t batch_counter = 0;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    double lr = base_lr;
    for (int m : config.lr_milestones)
      if (epoch >= m) lr *= config.lr_gamma;
    set_lr(opt.kind, lr);

    std::shuffle(order.begin(), order.end(), order_rng);
    double epoch_total = 0.0;
    for (std::size_t begin = 0; begin < n; begin += config.batch_size) {
      const std::size_t end = std::min(n, begin + config.batch_size);
      data::LabeledSet batch =
          train_set.subset(std::span(order.data() + begin, end - begin));
      ++batch_counter;
      if (config.mixup) {
        const std::size_t k = std::holds_alternative<data::PairwiseMixup>(*config.mixup)
                                  ? 2
                                  : std::get<data::DirichletMixup>(*config.mixup).k;
        if (batch.size() >= k)
          batch = data::mixup(batch, *config.mixup, derive_seed(config.seed, 1000 + batch_counter));
      }
      const auto inputs = input_matrix(batch);
      const auto trace = nn::forward_batch(params, inputs);
      const auto& raw = trace.outputs.back();
      Eigen::MatrixXd out_grad(raw.rows(), raw.cols());
      const double inv_b = 1.0 / static_cast<double>(batch.size());
      std::vector<double> g(dim + 1);
      for (Eigen::Index c = 0; c < raw.cols(); ++c) {
        const auto target = decompose(batch.target(static_cast<std::size_t>(c)));
        const auto out = split_output(raw.col(c));
        epoch_total += sample_objective(config, target, out, g);
        for (std::size_t j = 0; j <= dim; ++j)
          out_grad(static_cast<Eigen::Index>(j), c) = g[j] * inv_b;
      }
      const auto grads = nn::backward(params, trace, out_grad);
      nn::step(opt, params, grads);
    }
    const double mean_loss = epoch_total / static_cast<double>(n);
    log.epoch_loss.push_back(mean_loss);
    if (!std::isfinite(mean_loss))
      throw DivergenceError("training diverged: non-finite loss at epoch " + std::to_string(epoch),
                            epoch);
  }
  return log;
}

}  // namespace hcm
